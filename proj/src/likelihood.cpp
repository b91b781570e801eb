#include "sfp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sfp/error.hpp"
#include "sfp/math.hpp"

namespace sfp {
namespace {

constexpr std::size_t kBlock = 1024;

// Deterministic sum: fixed-size blocks are summed independently (possibly in
// parallel) and the partials are combined in block order, so the result is
// identical for any thread count, including one.
template <class F>
double blocked_sum(std::size_t n, bool parallel, F&& body) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (parallel && nblocks > 1)
    for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk) {
        const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += body(i);
        partial[static_cast<std::size_t>(blk)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

inline double bernoulli_loglik(double n, double y, double z) {
    return y * std::log(clamp_unit(z)) + (n - y) * std::log(clamp_unit(1.0 - z));
}

// First and second derivatives of the per-trace log-likelihood with respect
// to the flag probability z (unclamped by design; non-finite values propagate
// and are treated as rejections by the sampler).
inline double t1_term(double n, double y, double z) {
    return y / z - (n - y) / (1.0 - z);
}

inline double t2_term(double n, double y, double z) {
    return -y / (z * z) - (n - y) / ((1.0 - z) * (1.0 - z));
}

inline double jac(double p) { return p - p * p; }            // d expit / d logit
inline double jac2(double p) { return p - 3 * p * p + 2 * p * p * p; } // its derivative

} // namespace

PosteriorModel::PosteriorModel(const Dataset& data, const Diagnostic& diag, const Prior& prior,
                               Execution exec)
    : diag_(diag), prior_(prior), exec_(exec) {
    prior.validate();
    init(data);
}

PosteriorModel::PosteriorModel(const Dataset& data, const Diagnostic& diag, Execution exec)
    : diag_(diag), exec_(exec) {
    init(data);
}

void PosteriorModel::init(const Dataset& data) {
    data.validate();
    n_test_ = data.chain.n_test();
    n_supply_ = data.chain.n_supply();
    mode_ = data.mode;
    c_ = diag_.sensitivity + diag_.specificity - 1.0;
    omr_ = 1.0 - diag_.specificity;

    const TraceStats stats = sufficient_stats(data);
    if (mode_ == Mode::tracked) {
        arcs_ = stats.arcs; // already sorted by (test, supply)
        a_offset_.assign(n_test_ + 1, 0);
        for (const ArcCount& arc : arcs_) ++a_offset_[arc.test_node + 1];
        for (std::size_t a = 0; a < n_test_; ++a) a_offset_[a + 1] += a_offset_[a];

        b_offset_.assign(n_supply_ + 1, 0);
        for (const ArcCount& arc : arcs_) ++b_offset_[arc.supply_node + 1];
        for (std::size_t b = 0; b < n_supply_; ++b) b_offset_[b + 1] += b_offset_[b];
        arcs_by_b_.assign(arcs_.size(), 0);
        std::vector<std::size_t> cursor(b_offset_.begin(), b_offset_.end() - 1);
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
            arcs_by_b_[cursor[arcs_[k].supply_node]++] = k;
        }
    } else {
        node_n_.assign(n_test_, 0.0);
        node_y_.assign(n_test_, 0.0);
        for (const NodeCount& c : stats.nodes) {
            node_n_[c.test_node] = static_cast<double>(c.n);
            node_y_[c.test_node] = static_cast<double>(c.y);
        }
        q_ = data.sourcing->matrix();
        qt_ = Matrix(n_supply_, n_test_);
        for (std::size_t a = 0; a < n_test_; ++a) {
            for (std::size_t b = 0; b < n_supply_; ++b) qt_(b, a) = q_(a, b);
        }
    }
}

void PosteriorModel::check_dim(std::size_t n) const {
    if (n != dim()) {
        throw std::invalid_argument("likelihood: coordinate vector has " + std::to_string(n) +
                                    " entries, model dimension is " + std::to_string(dim()));
    }
}

double PosteriorModel::tracked_loglik(std::span<const double> eta,
                                      std::span<const double> theta) const {
    const bool par = exec_ == Execution::parallel;
    return blocked_sum(arcs_.size(), par, [&](std::size_t k) {
        const ArcCount& arc = arcs_[k];
        const double zs = eta[arc.test_node] + (1.0 - eta[arc.test_node]) * theta[arc.supply_node];
        const double z = omr_ + c_ * zs;
        return bernoulli_loglik(static_cast<double>(arc.n), static_cast<double>(arc.y), z);
    });
}

double PosteriorModel::untracked_loglik(std::span<const double> eta,
                                        std::span<const double> theta) const {
    const bool par = exec_ == Execution::parallel;
    return blocked_sum(n_test_, par, [&](std::size_t a) {
        if (node_n_[a] <= 0.0) return 0.0;
        double mix = 0.0;
        const auto row = q_.row(a);
        for (std::size_t b = 0; b < n_supply_; ++b) mix += row[b] * theta[b];
        const double zs = eta[a] + (1.0 - eta[a]) * mix;
        const double z = omr_ + c_ * zs;
        return bernoulli_loglik(node_n_[a], node_y_[a], z);
    });
}

double PosteriorModel::data_log_likelihood(std::span<const double> x) const {
    check_dim(x.size());
    std::vector<double> eta(n_test_), theta(n_supply_);
    for (std::size_t a = 0; a < n_test_; ++a) eta[a] = expit(x[a]);
    for (std::size_t b = 0; b < n_supply_; ++b) theta[b] = expit(x[n_test_ + b]);
    return mode_ == Mode::tracked ? tracked_loglik(eta, theta) : untracked_loglik(eta, theta);
}

double PosteriorModel::log_density(std::span<const double> x) const {
    double total = data_log_likelihood(x);
    if (prior_) {
        for (std::size_t i = 0; i < x.size(); ++i) total += prior_->log_density_1d(x[i]);
    }
    return total;
}

void PosteriorModel::gradient(std::span<const double> x, std::span<double> grad) const {
    check_dim(x.size());
    check_dim(grad.size());
    const bool par = exec_ == Execution::parallel;
    const std::size_t na = n_test_;
    const std::size_t nb = n_supply_;
    std::vector<double> eta(na), theta(nb);
    for (std::size_t a = 0; a < na; ++a) eta[a] = expit(x[a]);
    for (std::size_t b = 0; b < nb; ++b) theta[b] = expit(x[na + b]);

    if (mode_ == Mode::tracked) {
        const std::size_t ne = arcs_.size();
        std::vector<double> t1(ne);
#pragma omp parallel for schedule(static) if (par && ne > 512)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(ne); ++k) {
            const ArcCount& arc = arcs_[static_cast<std::size_t>(k)];
            const double zs =
                eta[arc.test_node] + (1.0 - eta[arc.test_node]) * theta[arc.supply_node];
            const double z = omr_ + c_ * zs;
            t1[static_cast<std::size_t>(k)] =
                t1_term(static_cast<double>(arc.n), static_cast<double>(arc.y), z);
        }
        // Each coordinate's sum runs over its arcs in a fixed order, so the
        // result does not depend on how coordinates are assigned to threads.
#pragma omp parallel for schedule(static) if (par && na > 8)
        for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(na); ++a) {
            double s = 0.0;
            for (std::size_t k = a_offset_[a]; k < a_offset_[a + 1]; ++k) {
                s += c_ * (1.0 - theta[arcs_[k].supply_node]) * t1[k];
            }
            grad[a] = s * jac(eta[a]);
        }
#pragma omp parallel for schedule(static) if (par && nb > 8)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
            double s = 0.0;
            for (std::size_t idx = b_offset_[b]; idx < b_offset_[b + 1]; ++idx) {
                const std::size_t k = arcs_by_b_[idx];
                s += c_ * (1.0 - eta[arcs_[k].test_node]) * t1[k];
            }
            grad[na + b] = s * jac(theta[b]);
        }
    } else {
        std::vector<double> w(na, 0.0), t1(na, 0.0), fac(na, 0.0);
#pragma omp parallel for schedule(static) if (par && na > 8)
        for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(na); ++a) {
            double mix = 0.0;
            const auto row = q_.row(static_cast<std::size_t>(a));
            for (std::size_t b = 0; b < nb; ++b) mix += row[b] * theta[b];
            w[a] = mix;
            if (node_n_[a] > 0.0) {
                const double zs = eta[a] + (1.0 - eta[a]) * mix;
                const double z = omr_ + c_ * zs;
                t1[a] = t1_term(node_n_[a], node_y_[a], z);
                fac[a] = c_ * (1.0 - eta[a]) * t1[a];
            }
        }
        for (std::size_t a = 0; a < na; ++a) {
            grad[a] = c_ * (1.0 - w[a]) * jac(eta[a]) * t1[a];
        }
#pragma omp parallel for schedule(static) if (par && nb > 8)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
            double s = 0.0;
            const auto col = qt_.row(static_cast<std::size_t>(b));
            for (std::size_t a = 0; a < na; ++a) s += col[a] * fac[a];
            grad[na + b] = s * jac(theta[b]);
        }
    }

    if (prior_) {
        for (std::size_t i = 0; i < x.size(); ++i) grad[i] += prior_->grad_1d(x[i]);
    }
}

HessianResult PosteriorModel::hessian(std::span<const double> x) const {
    check_dim(x.size());
    const std::size_t na = n_test_;
    const std::size_t nb = n_supply_;
    const std::size_t d = na + nb;
    std::vector<double> eta(na), theta(nb);
    for (std::size_t a = 0; a < na; ++a) eta[a] = expit(x[a]);
    for (std::size_t b = 0; b < nb; ++b) theta[b] = expit(x[na + b]);

    HessianResult out;
    out.matrix = Matrix(d, d, 0.0);
    Matrix& h = out.matrix;

    if (mode_ == Mode::tracked) {
        for (const ArcCount& arc : arcs_) {
            const std::size_t a = arc.test_node;
            const std::size_t b = arc.supply_node;
            const double zs = eta[a] + (1.0 - eta[a]) * theta[b];
            const double z = omr_ + c_ * zs;
            const double n = static_cast<double>(arc.n);
            const double y = static_cast<double>(arc.y);
            const double t1 = t1_term(n, y, z);
            const double t2 = t2_term(n, y, z);
            const double je = jac(eta[a]);
            const double jt = jac(theta[b]);
            // d z*/d eta = 1 - theta, d z*/d theta = 1 - eta, d2 z*/(d eta d theta) = -1.
            h(a, a) += sq(c_ * (1.0 - theta[b]) * je) * t2 +
                       c_ * (1.0 - theta[b]) * jac2(eta[a]) * t1;
            h(na + b, na + b) += sq(c_ * (1.0 - eta[a]) * jt) * t2 +
                                 c_ * (1.0 - eta[a]) * jac2(theta[b]) * t1;
            const double cross = c_ * c_ * (1.0 - eta[a]) * (1.0 - theta[b]) * je * jt * t2 -
                                 c_ * je * jt * t1;
            h(a, na + b) += cross;
            h(na + b, a) += cross;
        }
    } else {
        for (std::size_t a = 0; a < na; ++a) {
            if (node_n_[a] <= 0.0) continue;
            double mix = 0.0;
            const auto row = q_.row(a);
            for (std::size_t b = 0; b < nb; ++b) mix += row[b] * theta[b];
            const double zs = eta[a] + (1.0 - eta[a]) * mix;
            const double z = omr_ + c_ * zs;
            const double t1 = t1_term(node_n_[a], node_y_[a], z);
            const double t2 = t2_term(node_n_[a], node_y_[a], z);
            const double je = jac(eta[a]);
            h(a, a) += sq(c_ * (1.0 - mix) * je) * t2 + c_ * (1.0 - mix) * jac2(eta[a]) * t1;
            for (std::size_t b = 0; b < nb; ++b) {
                if (row[b] == 0.0) continue;
                const double jt = jac(theta[b]);
                const double dzb = (1.0 - eta[a]) * row[b];
                h(na + b, na + b) +=
                    sq(c_ * dzb * jt) * t2 + c_ * dzb * jac2(theta[b]) * t1;
                const double cross = c_ * c_ * (1.0 - mix) * dzb * je * jt * t2 -
                                     c_ * row[b] * je * jt * t1;
                h(a, na + b) += cross;
                h(na + b, a) += cross;
                for (std::size_t b2 = b + 1; b2 < nb; ++b2) {
                    if (row[b2] == 0.0) continue;
                    const double pair = c_ * c_ * dzb * (1.0 - eta[a]) * row[b2] * jt *
                                        jac(theta[b2]) * t2;
                    h(na + b, na + b2) += pair;
                    h(na + b2, na + b) += pair;
                }
            }
        }
    }

    if (prior_) {
        for (std::size_t i = 0; i < d; ++i) {
            h(i, i) += prior_->curvature_1d(x[i]);
            if (prior_->family == PriorFamily::laplace && x[i] == prior_->gamma) {
                out.at_prior_kink = true;
            }
        }
    }
    return out;
}

double log_likelihood(const RateVector& rates, const Dataset& data, const Diagnostic& diag,
                      Execution exec) {
    rates.validate();
    if (rates.eta.size() != data.chain.n_test() || rates.theta.size() != data.chain.n_supply()) {
        throw std::invalid_argument("likelihood: rate vector does not match the chain dimensions");
    }
    PosteriorModel model(data, diag, exec);
    const LogitRates x = to_logit(rates);
    std::vector<double> packed(x.alpha);
    packed.insert(packed.end(), x.beta.begin(), x.beta.end());
    return model.data_log_likelihood(packed);
}

namespace {
std::vector<double> pack(const LogitRates& x) {
    std::vector<double> packed(x.alpha);
    packed.insert(packed.end(), x.beta.begin(), x.beta.end());
    return packed;
}
} // namespace

double log_posterior(const LogitRates& x, const Dataset& data, const Diagnostic& diag,
                     const Prior& prior, Execution exec) {
    PosteriorModel model(data, diag, prior, exec);
    return model.log_density(pack(x));
}

std::vector<double> log_posterior_gradient(const LogitRates& x, const Dataset& data,
                                           const Diagnostic& diag, const Prior& prior,
                                           Execution exec) {
    PosteriorModel model(data, diag, prior, exec);
    const std::vector<double> packed = pack(x);
    std::vector<double> grad(packed.size());
    model.gradient(packed, grad);
    return grad;
}

HessianResult log_posterior_hessian(const LogitRates& x, const Dataset& data,
                                    const Diagnostic& diag, const Prior& prior) {
    PosteriorModel model(data, diag, prior, Execution::serial);
    return model.hessian(pack(x));
}

namespace checks {

std::vector<double> natural_gradient(const RateVector& rates, const Dataset& data,
                                     const Diagnostic& diag) {
    rates.validate();
    data.validate();
    if (rates.eta.size() != data.chain.n_test() || rates.theta.size() != data.chain.n_supply()) {
        throw std::invalid_argument("likelihood: rate vector does not match the chain dimensions");
    }
    const double c = diag.sensitivity + diag.specificity - 1.0;
    const double omr = 1.0 - diag.specificity;
    const TraceStats stats = sufficient_stats(data);
    std::vector<double> grad(rates.dim(), 0.0);
    const std::size_t na = rates.eta.size();
    if (data.mode == Mode::tracked) {
        for (const ArcCount& arc : stats.arcs) {
            const double e = rates.eta[arc.test_node];
            const double t = rates.theta[arc.supply_node];
            const double z = omr + c * (e + (1.0 - e) * t);
            const double t1 = t1_term(static_cast<double>(arc.n), static_cast<double>(arc.y), z);
            grad[arc.test_node] += c * (1.0 - t) * t1;
            grad[na + arc.supply_node] += c * (1.0 - e) * t1;
        }
    } else {
        const SourcingMatrix& q = *data.sourcing;
        for (const NodeCount& node : stats.nodes) {
            const double e = rates.eta[node.test_node];
            double mix = 0.0;
            for (std::size_t b = 0; b < rates.theta.size(); ++b) {
                mix += q(node.test_node, b) * rates.theta[b];
            }
            const double z = omr + c * (e + (1.0 - e) * mix);
            const double t1 = t1_term(static_cast<double>(node.n), static_cast<double>(node.y), z);
            grad[node.test_node] += c * (1.0 - mix) * t1;
            for (std::size_t b = 0; b < rates.theta.size(); ++b) {
                grad[na + b] += c * (1.0 - e) * q(node.test_node, b) * t1;
            }
        }
    }
    return grad;
}

} // namespace checks

} // namespace sfp
