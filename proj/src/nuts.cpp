#include "sfp/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "sfp/error.hpp"
#include "sfp/math.hpp"
#include "sfp/rng.hpp"

namespace sfp {
namespace {

constexpr double kDeltaMax = 1000.0; // energy-error divergence threshold (nats)
constexpr double kDaGamma = 0.05;    // dual-averaging shrinkage
constexpr double kDaT0 = 10.0;       // dual-averaging iteration offset
constexpr double kDaKappa = 0.75;    // dual-averaging decay exponent

double finite_or_neg_inf(double v) {
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

// One endpoint of a trajectory: position, momentum, cached gradient and
// log density at the position.
struct Edge {
    std::vector<double> q, p, g;
    double logp = 0.0;
};

struct TreeOut {
    Edge minus, plus;
    std::vector<double> sample;
    std::size_t n = 0;     // slice-valid states in the subtree
    bool stop = false;     // u-turn or divergence inside the subtree
    bool diverged = false; // energy error exceeded kDeltaMax
    double alpha = 0.0;    // summed acceptance statistic
    std::size_t n_alpha = 0;
};

class NutsChain {
public:
    NutsChain(const LogDensityModel& model, const SamplerConfig& cfg, Rng rng,
              std::vector<double> init)
        : model_(model), cfg_(cfg), rng_(std::move(rng)), dim_(model.dim()),
          inv_mass_(dim_, 1.0), mom_sd_(dim_, 1.0) {
        q_ = std::move(init);
        g_.resize(dim_);
        logp_ = eval(q_, g_);
        if (!std::isfinite(logp_)) {
            throw NumericalError("nuts: starting point has non-finite log density");
        }
    }

    // Writes cfg_.inference_draws rows starting at out(row_offset, .).
    void run(Matrix& out, std::size_t row_offset, ChainDiagnostics& diag) {
        eps_ = find_reasonable_epsilon();
        double mu = std::log(10.0 * eps_);
        double h_bar = 0.0;
        double log_eps_bar = 0.0;
        std::size_t m_adapt = 0; // dual-averaging iteration counter

        const std::size_t warm = cfg_.warmup_draws;
        const std::size_t collect_lo = warm / 4;
        const std::size_t collect_hi = (3 * warm) / 4;
        std::vector<double> mass_sum, mass_sumsq;
        std::size_t mass_n = 0;
        const bool adapt_mass = cfg_.adapt_mass_matrix && warm >= 20;
        if (adapt_mass) {
            mass_sum.assign(dim_, 0.0);
            mass_sumsq.assign(dim_, 0.0);
        }

        double accept_sum = 0.0;
        double depth_sum = 0.0;

        for (std::size_t m = 1; m <= warm + cfg_.inference_draws; ++m) {
            const bool warming = m <= warm;
            double a_stat = 0.0;
            std::size_t depth = 0;
            bool diverged = false;
            draw_once(a_stat, depth, diverged);

            if (warming) {
                ++m_adapt;
                const double md = static_cast<double>(m_adapt);
                h_bar = (1.0 - 1.0 / (md + kDaT0)) * h_bar +
                        (cfg_.target_accept - a_stat) / (md + kDaT0);
                const double log_eps = mu - std::sqrt(md) / kDaGamma * h_bar;
                const double w = std::pow(md, -kDaKappa);
                log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
                eps_ = std::exp(log_eps);

                if (adapt_mass && m > collect_lo && m <= collect_hi) {
                    for (std::size_t i = 0; i < dim_; ++i) {
                        mass_sum[i] += q_[i];
                        mass_sumsq[i] += q_[i] * q_[i];
                    }
                    ++mass_n;
                    if (m == collect_hi && mass_n >= 10) {
                        const double nn = static_cast<double>(mass_n);
                        for (std::size_t i = 0; i < dim_; ++i) {
                            const double mean = mass_sum[i] / nn;
                            double var = mass_sumsq[i] / nn - mean * mean;
                            // Shrink toward a small floor, as usual for
                            // windowed estimates from few samples.
                            var = (nn / (nn + 5.0)) * var + (5.0 / (nn + 5.0)) * 1e-3;
                            inv_mass_[i] = std::max(var, 1e-10);
                            mom_sd_[i] = 1.0 / std::sqrt(inv_mass_[i]);
                        }
                        // Re-tune the step size for the new metric.
                        eps_ = find_reasonable_epsilon();
                        mu = std::log(10.0 * eps_);
                        h_bar = 0.0;
                        log_eps_bar = 0.0;
                        m_adapt = 0;
                    }
                }
                if (m == warm) {
                    eps_ = std::exp(log_eps_bar);
                    if (!(eps_ > 0.0) || !std::isfinite(eps_)) {
                        throw NumericalError("nuts: step-size adaptation collapsed");
                    }
                }
            } else {
                const std::size_t row = row_offset + (m - warm - 1);
                for (std::size_t i = 0; i < dim_; ++i) out(row, i) = q_[i];
                accept_sum += a_stat;
                depth_sum += static_cast<double>(depth);
                if (diverged) ++diag.divergences;
                if (depth == cfg_.max_tree_depth) ++diag.max_depth_hits;
            }
        }
        diag.step_size = eps_;
        const double nd = static_cast<double>(cfg_.inference_draws);
        diag.mean_accept_stat = accept_sum / nd;
        diag.mean_tree_depth = depth_sum / nd;
    }

private:
    double eval(const std::vector<double>& q, std::vector<double>& g) const {
        const double lp = model_.log_density(q);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        model_.gradient(q, g);
        return lp;
    }

    double kinetic(const std::vector<double>& p) const {
        double k = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) k += p[i] * p[i] * inv_mass_[i];
        return 0.5 * k;
    }

    std::vector<double> draw_momentum() {
        std::vector<double> p(dim_);
        for (std::size_t i = 0; i < dim_; ++i) p[i] = rng_.normal() * mom_sd_[i];
        return p;
    }

    // One leapfrog step of size step (sign encodes direction).
    Edge leapfrog(const Edge& from, double step) const {
        Edge e;
        e.q = from.q;
        e.p = from.p;
        e.g.resize(dim_);
        // Non-finite gradients propagate into the position/momentum; the
        // joint energy then evaluates to -inf and the state is rejected.
        for (std::size_t i = 0; i < dim_; ++i) e.p[i] += 0.5 * step * from.g[i];
        for (std::size_t i = 0; i < dim_; ++i) e.q[i] += step * inv_mass_[i] * e.p[i];
        e.logp = eval(e.q, e.g);
        if (std::isfinite(e.logp)) {
            for (std::size_t i = 0; i < dim_; ++i) e.p[i] += 0.5 * step * e.g[i];
        }
        return e;
    }

    double joint(const Edge& e) const {
        if (!std::isfinite(e.logp)) return -std::numeric_limits<double>::infinity();
        return finite_or_neg_inf(e.logp - kinetic(e.p));
    }

    bool no_uturn(const Edge& minus, const Edge& plus) const {
        double fwd = 0.0, bwd = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double dq = plus.q[i] - minus.q[i];
            fwd += dq * inv_mass_[i] * plus.p[i];
            bwd += dq * inv_mass_[i] * minus.p[i];
        }
        return fwd >= 0.0 && bwd >= 0.0;
    }

    TreeOut build_tree(const Edge& from, double log_u, int dir, std::size_t depth,
                       double joint0) {
        TreeOut t;
        if (depth == 0) {
            Edge e = leapfrog(from, dir * eps_);
            const double j = joint(e);
            t.n = (log_u <= j) ? 1 : 0;
            t.stop = !(log_u < j + kDeltaMax);
            t.diverged = t.stop;
            const double da = j - joint0;
            t.alpha = std::isfinite(da) ? std::min(1.0, std::exp(da)) : 0.0;
            t.n_alpha = 1;
            t.sample = e.q;
            t.minus = e;
            t.plus = std::move(e);
            return t;
        }
        TreeOut t1 = build_tree(from, log_u, dir, depth - 1, joint0);
        if (t1.stop) return t1;
        const Edge& edge = (dir == 1) ? t1.plus : t1.minus;
        TreeOut t2 = build_tree(edge, log_u, dir, depth - 1, joint0);
        t.minus = (dir == 1) ? std::move(t1.minus) : std::move(t2.minus);
        t.plus = (dir == 1) ? std::move(t2.plus) : std::move(t1.plus);
        const std::size_t total = t1.n + t2.n;
        const double u = rng_.uniform();
        t.sample = (total > 0 && u * static_cast<double>(total) < static_cast<double>(t2.n))
                       ? std::move(t2.sample)
                       : std::move(t1.sample);
        t.n = total;
        t.stop = t2.stop || !no_uturn(t.minus, t.plus);
        t.diverged = t1.diverged || t2.diverged;
        t.alpha = t1.alpha + t2.alpha;
        t.n_alpha = t1.n_alpha + t2.n_alpha;
        return t;
    }

    void draw_once(double& a_stat, std::size_t& depth, bool& diverged) {
        Edge cur;
        cur.q = q_;
        cur.p = draw_momentum();
        cur.g = g_;
        cur.logp = logp_;
        const double joint0 = joint(cur);
        const double log_u = joint0 + std::log(rng_.uniform_pos());

        Edge minus = cur;
        Edge plus = cur;
        std::size_t n = 1;
        bool stop = false;
        double alpha_last = 0.0;
        std::size_t n_alpha_last = 1;
        depth = 0;
        diverged = false;

        while (!stop && depth < cfg_.max_tree_depth) {
            const int dir = (rng_.uniform() < 0.5) ? -1 : 1;
            TreeOut t = build_tree(dir == 1 ? plus : minus, log_u, dir, depth, joint0);
            if (dir == 1) {
                plus = std::move(t.plus);
            } else {
                minus = std::move(t.minus);
            }
            if (!t.stop) {
                const double u = rng_.uniform();
                if (t.n > 0 && u * static_cast<double>(n) < static_cast<double>(t.n)) {
                    q_ = t.sample;
                }
            }
            n += t.n;
            stop = t.stop || !no_uturn(minus, plus);
            diverged = diverged || t.diverged;
            alpha_last = t.alpha;
            n_alpha_last = t.n_alpha;
            ++depth;
        }
        // Refresh the cached gradient/log density at the (possibly) new point.
        logp_ = eval(q_, g_);
        a_stat = n_alpha_last > 0 ? alpha_last / static_cast<double>(n_alpha_last) : 0.0;
    }

    // Doubles/halves from 1 until one leapfrog step crosses acceptance 1/2.
    double find_reasonable_epsilon() {
        eps_ = 1.0;
        Edge cur;
        cur.q = q_;
        cur.p = draw_momentum();
        cur.g = g_;
        cur.logp = logp_;
        const double joint0 = joint(cur);
        Edge probe = leapfrog(cur, eps_);
        double log_ratio = finite_or_neg_inf(joint(probe) - joint0);
        const double dir = (log_ratio > std::log(0.5)) ? 1.0 : -1.0;
        for (int iter = 0; iter < 100; ++iter) {
            if (!(dir * log_ratio > -dir * std::log(2.0))) break;
            eps_ *= (dir > 0.0) ? 2.0 : 0.5;
            probe = leapfrog(cur, eps_);
            log_ratio = finite_or_neg_inf(joint(probe) - joint0);
        }
        if (!(eps_ > 0.0) || !std::isfinite(eps_)) {
            throw NumericalError("nuts: could not find a workable initial step size");
        }
        return eps_;
    }

    const LogDensityModel& model_;
    const SamplerConfig& cfg_;
    Rng rng_;
    std::size_t dim_;
    std::vector<double> inv_mass_;
    std::vector<double> mom_sd_;
    std::vector<double> q_, g_;
    double logp_ = 0.0;
    double eps_ = 1.0;
};

} // namespace

void SamplerConfig::validate() const {
    if (!(target_accept > 0.0) || !(target_accept < 1.0)) {
        throw std::invalid_argument("nuts: target acceptance must lie in (0,1)");
    }
    if (inference_draws == 0) {
        throw std::invalid_argument("nuts: at least one inference draw is required");
    }
    if (max_tree_depth < 5 || max_tree_depth > 15) {
        throw std::invalid_argument("nuts: max tree depth must lie in [5, 15]; got " +
                                    std::to_string(max_tree_depth));
    }
    if (chains == 0) {
        throw std::invalid_argument("nuts: at least one chain is required");
    }
}

Matrix sample_chain(const LogDensityModel& model, std::span<const double> init,
                    const SamplerConfig& cfg, std::uint64_t chain_seed,
                    ChainDiagnostics* diag) {
    cfg.validate();
    if (init.size() != model.dim()) {
        throw std::invalid_argument("nuts: start point dimension mismatch");
    }
    Matrix out(cfg.inference_draws, model.dim());
    ChainDiagnostics local;
    NutsChain chain(model, cfg, Rng(chain_seed), std::vector<double>(init.begin(), init.end()));
    chain.run(out, 0, local);
    if (diag) *diag = local;
    return out;
}

PosteriorDraws sample(const Dataset& data, const Diagnostic& diag, const Prior& prior,
                      const SamplerConfig& cfg, Execution exec) {
    cfg.validate();
    prior.validate();
    PosteriorModel model(data, diag, prior, exec);
    const std::size_t d = model.dim();

    PosteriorDraws out;
    out.labels = data.chain.test_nodes;
    out.labels.insert(out.labels.end(), data.chain.supply_nodes.begin(),
                      data.chain.supply_nodes.end());
    out.n_test_nodes = model.n_test();
    out.n_supply_nodes = model.n_supply();
    out.draws_per_chain = cfg.inference_draws;
    out.logit_draws = Matrix(cfg.chains * cfg.inference_draws, d);
    out.chain_diagnostics.assign(cfg.chains, ChainDiagnostics{});

    std::exception_ptr first_error;
    const std::ptrdiff_t n_chains = static_cast<std::ptrdiff_t>(cfg.chains);
#pragma omp parallel for schedule(static, 1) if (cfg.chains > 1)
    for (std::ptrdiff_t c = 0; c < n_chains; ++c) {
        try {
            Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(c)));
            // Start from a prior-scaled box; retry until the target is finite.
            std::vector<double> init(d);
            bool found = false;
            for (int attempt = 0; attempt < 100 && !found; ++attempt) {
                for (std::size_t i = 0; i < d; ++i) {
                    init[i] = prior.gamma - prior.nu + 2.0 * prior.nu * rng.uniform();
                }
                found = std::isfinite(model.log_density(init));
            }
            if (!found) {
                throw NumericalError(
                    "nuts: no finite log-posterior start point in 100 attempts");
            }
            NutsChain chain(model, cfg, std::move(rng), std::move(init));
            chain.run(out.logit_draws, static_cast<std::size_t>(c) * cfg.inference_draws,
                      out.chain_diagnostics[static_cast<std::size_t>(c)]);
        } catch (...) {
#pragma omp critical
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    out.rate_draws = Matrix(out.logit_draws.rows(), d);
    for (std::size_t r = 0; r < out.logit_draws.rows(); ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            const double v = expit(out.logit_draws(r, i));
            if (std::isnan(v)) {
                throw NumericalError("nuts: NaN rate draw");
            }
            out.rate_draws(r, i) = v;
        }
    }
    return out;
}

namespace {

// Split-half R-hat over a set of equally long sequences addressed as
// (row offset, length) into per-run rate matrices.
struct SeqRef {
    const Matrix* m;
    std::size_t row0;
    std::size_t len;
};

std::vector<double> rhat_core(const std::vector<SeqRef>& chains, std::size_t dim) {
    if (chains.empty()) {
        throw std::invalid_argument("nuts: no chains for rhat");
    }
    const std::size_t half = chains.front().len / 2;
    if (half < 2) {
        throw std::invalid_argument("nuts: rhat needs at least 4 draws per chain");
    }
    std::vector<SeqRef> seqs;
    for (const SeqRef& c : chains) {
        seqs.push_back({c.m, c.row0, half});
        seqs.push_back({c.m, c.row0 + (c.len - half), half});
    }
    const double n = static_cast<double>(half);
    const double m = static_cast<double>(seqs.size());
    std::vector<double> out(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double grand = 0.0;
        std::vector<double> means(seqs.size()), vars(seqs.size());
        for (std::size_t s = 0; s < seqs.size(); ++s) {
            double mean = 0.0;
            for (std::size_t t = 0; t < half; ++t) mean += (*seqs[s].m)(seqs[s].row0 + t, j);
            mean /= n;
            double var = 0.0;
            for (std::size_t t = 0; t < half; ++t) {
                var += sq((*seqs[s].m)(seqs[s].row0 + t, j) - mean);
            }
            vars[s] = var / (n - 1.0);
            means[s] = mean;
            grand += mean;
        }
        grand /= m;
        double w = 0.0;
        for (double v : vars) w += v;
        w /= m;
        double b = 0.0;
        for (double mu : means) b += sq(mu - grand);
        b = b * n / (m - 1.0);
        if (w == 0.0) {
            out[j] = (b == 0.0) ? 1.0 : std::numeric_limits<double>::infinity();
            continue;
        }
        const double var_plus = (n - 1.0) / n * w + b / n;
        out[j] = std::sqrt(var_plus / w);
    }
    return out;
}

} // namespace

std::vector<double> split_rhat(const PosteriorDraws& draws) {
    std::vector<SeqRef> chains;
    for (std::size_t c = 0; c < draws.n_chains(); ++c) {
        chains.push_back({&draws.rate_draws, c * draws.draws_per_chain, draws.draws_per_chain});
    }
    return rhat_core(chains, draws.dim());
}

std::vector<double> rhat(const std::vector<PosteriorDraws>& runs) {
    if (runs.size() < 2) {
        throw std::invalid_argument("nuts: rhat needs at least two runs");
    }
    std::vector<SeqRef> chains;
    for (const PosteriorDraws& r : runs) {
        if (r.dim() != runs.front().dim() ||
            r.draws_per_chain != runs.front().draws_per_chain) {
            throw std::invalid_argument("nuts: rhat runs must have identical shapes");
        }
        for (std::size_t c = 0; c < r.n_chains(); ++c) {
            chains.push_back({&r.rate_draws, c * r.draws_per_chain, r.draws_per_chain});
        }
    }
    return rhat_core(chains, runs.front().dim());
}

} // namespace sfp
