#include "sfp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "sfp/error.hpp"
#include "sfp/math.hpp"
#include "sfp/priors.hpp"
#include "sfp/rng.hpp"
#include "sfp/trace_stats.hpp"

namespace sfp {

const char* to_string(Echelon e) {
    return e == Echelon::test ? "test" : "supply";
}

const char* to_string(Category c) {
    switch (c) {
        case Category::no_action: return "no-action";
        case Category::investigate: return "investigate";
        case Category::act: return "act";
        default: return "unset";
    }
}

void Thresholds::validate() const {
    if (!(0.0 < l) || !(l < u) || !(u < 1.0)) {
        throw std::invalid_argument("inference: thresholds need 0 < l < u < 1; got l=" +
                                    std::to_string(l) + ", u=" + std::to_string(u));
    }
}

double empirical_quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("inference: quantile of an empty sample");
    }
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw std::invalid_argument("inference: quantile level must lie in [0,1]");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    // Linear interpolation at (1-based) position 1 + (n-1)p.
    const double pos = (static_cast<double>(v.size()) - 1.0) * p;
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    if (k + 1 >= v.size()) return v.back();
    return v[k] + frac * (v[k + 1] - v[k]);
}

std::vector<NodeInterval> credible_intervals(const PosteriorDraws& draws, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("inference: interval level alpha must lie in (0,1)");
    }
    const std::size_t rows = draws.rate_draws.rows();
    if (rows == 0) {
        throw std::invalid_argument("inference: no draws");
    }
    std::vector<NodeInterval> out;
    out.reserve(draws.dim());
    std::vector<double> column(rows);
    for (std::size_t j = 0; j < draws.dim(); ++j) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = draws.rate_draws(r, j);
        NodeInterval iv;
        if (j < draws.n_test_nodes) {
            iv.echelon = Echelon::test;
            iv.index = j;
        } else {
            iv.echelon = Echelon::supply;
            iv.index = j - draws.n_test_nodes;
        }
        iv.label = j < draws.labels.size() ? draws.labels[j] : "";
        iv.lower = empirical_quantile(column, alpha / 2.0);
        iv.median = empirical_quantile(column, 0.5);
        iv.upper = empirical_quantile(column, 1.0 - alpha / 2.0);
        out.push_back(std::move(iv));
    }
    return out;
}

void classify(std::vector<NodeInterval>& intervals, const Thresholds& thresholds) {
    thresholds.validate();
    for (NodeInterval& iv : intervals) {
        if (iv.lower > thresholds.l) {
            iv.category = Category::act;
        } else if (iv.upper > thresholds.u) {
            iv.category = Category::investigate;
        } else {
            iv.category = Category::no_action;
        }
    }
}

WaldInterval wald_interval(std::int64_t positives, std::int64_t n) {
    if (n <= 0) {
        throw std::invalid_argument("inference: Wald interval needs a positive sample count");
    }
    if (positives < 0 || positives > n) {
        throw std::invalid_argument("inference: positives must lie in [0, n]");
    }
    WaldInterval w;
    const double nn = static_cast<double>(n);
    w.estimate = static_cast<double>(positives) / nn;
    const double z = inverse_normal_cdf(0.95); // two-sided 90%
    const double half = z * std::sqrt(w.estimate * (1.0 - w.estimate) / nn);
    w.lower = std::max(0.0, w.estimate - half);
    w.upper = std::min(1.0, w.estimate + half);
    w.enough_positive = w.estimate * nn >= 5.0;
    w.enough_negative = (1.0 - w.estimate) * nn >= 5.0;
    return w;
}

SourcingMatrix estimate_q(const Dataset& tracked_data) {
    if (tracked_data.mode != Mode::tracked) {
        throw std::invalid_argument("inference: sourcing estimation needs tracked records");
    }
    tracked_data.validate(true);
    const std::size_t na = tracked_data.chain.n_test();
    const std::size_t nb = tracked_data.chain.n_supply();
    Matrix counts(na, nb, 0.0);
    std::vector<double> totals(na, 0.0);
    for (const TestRecord& r : tracked_data.records) {
        counts(r.test_node, *r.supply_node) += 1.0;
        totals[r.test_node] += 1.0;
    }
    for (std::size_t a = 0; a < na; ++a) {
        if (totals[a] == 0.0) {
            throw DataError("inference: test node '" + tracked_data.chain.test_nodes[a] +
                            "' has no records; its sourcing row is undefined");
        }
        for (std::size_t b = 0; b < nb; ++b) counts(a, b) /= totals[a];
    }
    return SourcingMatrix::from_matrix(std::move(counts));
}

BootstrapResult bootstrap_q_sensitivity(const Dataset& tracked_data, const Diagnostic& diag,
                                        const Prior& prior, const SamplerConfig& sampler,
                                        const BootstrapConfig& boot, Execution exec) {
    if (boot.replicates == 0) {
        throw std::invalid_argument("inference: at least one bootstrap replicate is required");
    }
    if (!(boot.alpha > 0.0) || !(boot.alpha < 1.0)) {
        throw std::invalid_argument("inference: bootstrap interval level must lie in (0,1)");
    }
    sampler.validate();
    // Also validates that every test node has records.
    const SourcingMatrix original_q = estimate_q(tracked_data);
    const TraceStats base_stats = sufficient_stats(tracked_data);

    const std::size_t na = tracked_data.chain.n_test();
    const std::size_t nb = tracked_data.chain.n_supply();
    const std::size_t dim = na + nb;
    const std::size_t n_records = tracked_data.records.size();

    std::vector<std::int64_t> base_n(na, 0), base_y(na, 0);
    for (const ArcCount& arc : base_stats.arcs) {
        base_n[arc.test_node] += arc.n;
        base_y[arc.test_node] += arc.y;
    }

    BootstrapResult out;
    out.labels = tracked_data.chain.test_nodes;
    out.labels.insert(out.labels.end(), tracked_data.chain.supply_nodes.begin(),
                      tracked_data.chain.supply_nodes.end());
    out.n_test = na;
    out.n_supply = nb;
    out.lowers = Matrix(boot.replicates, dim);
    out.uppers = Matrix(boot.replicates, dim);

    std::exception_ptr first_error;
    const std::ptrdiff_t reps = static_cast<std::ptrdiff_t>(boot.replicates);
#pragma omp parallel for schedule(static, 1) if (boot.replicates > 1)
    for (std::ptrdiff_t r = 0; r < reps; ++r) {
        try {
            const std::uint64_t rr = static_cast<std::uint64_t>(r);
            Rng resample_rng(mix_seed(mix_seed(boot.seed, 1), rr));

            Matrix counts(na, nb, 0.0);
            std::vector<std::int64_t> tot_n(na, 0), tot_y(na, 0);
            for (std::size_t i = 0; i < n_records; ++i) {
                const TestRecord& rec =
                    tracked_data.records[resample_rng.below(n_records)];
                counts(rec.test_node, *rec.supply_node) += 1.0;
                ++tot_n[rec.test_node];
                if (rec.positive) ++tot_y[rec.test_node];
            }

            Matrix qstar(na, nb, 0.0);
            for (std::size_t a = 0; a < na; ++a) {
                double total = 0.0;
                for (std::size_t b = 0; b < nb; ++b) total += counts(a, b);
                if (total == 0.0) {
                    // Resample dropped this node entirely; keep its observed mix.
                    for (std::size_t b = 0; b < nb; ++b) qstar(a, b) = original_q(a, b);
                } else {
                    for (std::size_t b = 0; b < nb; ++b) qstar(a, b) = counts(a, b) / total;
                }
            }

            Dataset replica;
            replica.chain = tracked_data.chain;
            replica.mode = Mode::untracked;
            replica.sourcing = SourcingMatrix::from_matrix(std::move(qstar));
            for (std::size_t a = 0; a < na; ++a) {
                const std::int64_t n_a = boot.full_record ? tot_n[a] : base_n[a];
                const std::int64_t y_a = boot.full_record ? tot_y[a] : base_y[a];
                for (std::int64_t i = 0; i < n_a; ++i) {
                    replica.records.push_back({a, std::nullopt, i < y_a});
                }
            }

            SamplerConfig cfg = sampler;
            cfg.seed = mix_seed(mix_seed(boot.seed, 2), rr);
            const PosteriorDraws draws = sample(replica, diag, prior, cfg, exec);
            const std::vector<NodeInterval> ivs = credible_intervals(draws, boot.alpha);
            for (std::size_t j = 0; j < dim; ++j) {
                out.lowers(static_cast<std::size_t>(r), j) = ivs[j].lower;
                out.uppers(static_cast<std::size_t>(r), j) = ivs[j].upper;
            }
        } catch (...) {
#pragma omp critical
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    out.summary.reserve(dim);
    std::vector<double> col(boot.replicates);
    for (std::size_t j = 0; j < dim; ++j) {
        EndpointSpread s;
        if (j < na) {
            s.echelon = Echelon::test;
            s.index = j;
        } else {
            s.echelon = Echelon::supply;
            s.index = j - na;
        }
        s.label = out.labels[j];
        for (std::size_t r = 0; r < boot.replicates; ++r) col[r] = out.lowers(r, j);
        s.lower_q05 = empirical_quantile(col, 0.05);
        s.lower_q95 = empirical_quantile(col, 0.95);
        for (std::size_t r = 0; r < boot.replicates; ++r) col[r] = out.uppers(r, j);
        s.upper_q05 = empirical_quantile(col, 0.05);
        s.upper_q95 = empirical_quantile(col, 0.95);
        out.summary.push_back(std::move(s));
    }
    return out;
}

} // namespace sfp
