#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfp/matrix.hpp"
#include "sfp/priors.hpp"
#include "sfp/trace_stats.hpp"
#include "sfp/types.hpp"

namespace sfp {

// Kernel dispatch. Both paths use the same blocked summation order, so their
// results agree to the last bit for any thread count; `serial` is the
// reference implementation exercised by tests and the benchmark.
enum class Execution { serial, parallel };

// What the sampler needs from a target distribution.
class LogDensityModel {
public:
    virtual ~LogDensityModel() = default;
    virtual std::size_t dim() const = 0;
    virtual double log_density(std::span<const double> x) const = 0;
    virtual void gradient(std::span<const double> x, std::span<double> grad) const = 0;
};

struct HessianResult {
    Matrix matrix;
    // True when some coordinate sits exactly at a Laplace prior's kink; the
    // zero subgradient/curvature convention is used there.
    bool at_prior_kink = false;
};

// Log posterior of logit-scale rates given aggregated surveillance counts.
// Coordinates are packed [alpha_0..alpha_{A-1}, beta_0..beta_{B-1}]. The
// likelihood factorizes over traces (arcs in tracked mode, test nodes in
// untracked mode); per-trace probabilities run through the diagnostic's
// sensitivity/specificity. Probabilities are clamped to [1e-12, 1-1e-12]
// inside logarithms only; derivative terms use the unclamped values.
class PosteriorModel final : public LogDensityModel {
public:
    // Full posterior: likelihood plus independent per-coordinate prior.
    PosteriorModel(const Dataset& data, const Diagnostic& diag, const Prior& prior,
                   Execution exec = Execution::parallel);
    // Likelihood-only target (no prior terms); used by tests and internal checks.
    PosteriorModel(const Dataset& data, const Diagnostic& diag,
                   Execution exec = Execution::parallel);

    std::size_t dim() const override { return n_test_ + n_supply_; }
    std::size_t n_test() const { return n_test_; }
    std::size_t n_supply() const { return n_supply_; }
    Mode mode() const { return mode_; }
    Execution execution() const { return exec_; }
    const std::optional<Prior>& prior() const { return prior_; }

    double log_density(std::span<const double> x) const override;
    void gradient(std::span<const double> x, std::span<double> grad) const override;

    // Data term alone (an empty dataset gives exactly 0).
    double data_log_likelihood(std::span<const double> x) const;

    // Dense symmetric matrix of second derivatives (serial; diagnostic use).
    HessianResult hessian(std::span<const double> x) const;

private:
    void init(const Dataset& data);
    void check_dim(std::size_t n) const;

    double tracked_loglik(std::span<const double> eta, std::span<const double> theta) const;
    double untracked_loglik(std::span<const double> eta, std::span<const double> theta) const;

    std::size_t n_test_ = 0;
    std::size_t n_supply_ = 0;
    Mode mode_ = Mode::tracked;
    Diagnostic diag_;
    std::optional<Prior> prior_;
    Execution exec_ = Execution::parallel;
    double c_ = 1.0;   // sensitivity + specificity - 1
    double omr_ = 0.0; // 1 - specificity

    // Tracked: arcs sorted by (test, supply); slices by test node are the
    // contiguous ranges a_offset_[a] .. a_offset_[a+1); arcs_by_b_ lists arc
    // indices grouped by supply node (b_offset_ delimits groups).
    std::vector<ArcCount> arcs_;
    std::vector<std::size_t> a_offset_;
    std::vector<std::size_t> b_offset_;
    std::vector<std::size_t> arcs_by_b_;

    // Untracked: dense per-test-node counts (zero where unobserved), the
    // sourcing matrix and its transpose (for supply-side accumulations).
    std::vector<double> node_n_;
    std::vector<double> node_y_;
    Matrix q_;
    Matrix qt_;
};

// Convenience free functions mirroring the model methods.
double log_likelihood(const RateVector& rates, const Dataset& data, const Diagnostic& diag,
                      Execution exec = Execution::serial);
double log_posterior(const LogitRates& x, const Dataset& data, const Diagnostic& diag,
                     const Prior& prior, Execution exec = Execution::serial);
std::vector<double> log_posterior_gradient(const LogitRates& x, const Dataset& data,
                                           const Diagnostic& diag, const Prior& prior,
                                           Execution exec = Execution::serial);
HessianResult log_posterior_hessian(const LogitRates& x, const Dataset& data,
                                    const Diagnostic& diag, const Prior& prior);

namespace checks {
// Likelihood derivatives in the natural (rate) parameters, packed
// [d/d eta..., d/d theta...]. Kept as an internal consistency hook: the
// logit-scale gradient must equal this times the logistic Jacobian.
std::vector<double> natural_gradient(const RateVector& rates, const Dataset& data,
                                     const Diagnostic& diag);
} // namespace checks

} // namespace sfp
