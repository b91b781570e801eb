#pragma once

#include <cstdint>
#include <span>

#include "sfp/types.hpp"

namespace sfp {

enum class PriorFamily { normal, laplace };

const char* to_string(PriorFamily f);

// Independent per-coordinate prior on *logit-scale* rates. Every coordinate
// (test- or supply-node logit) shares the same 1-D density: either
// Normal(gamma, nu^2) or Laplace(gamma, scale nu). Densities are normalized;
// no change-of-variables term is applied because the prior is defined
// directly on the logit coordinates the sampler moves in.
struct Prior {
    PriorFamily family = PriorFamily::laplace;
    double gamma = -2.5; // location on the logit scale
    double nu = 1.3;     // sd (normal) or scale (laplace); must be > 0

    static Prior normal(double gamma, double nu);
    static Prior laplace(double gamma, double nu);
    // Convenience for configs that quote the normal spread as a variance.
    static Prior normal_from_variance(double gamma, double variance);

    void validate() const;

    // 1-D building blocks at a single logit coordinate x.
    double log_density_1d(double x) const;
    // First derivative of log_density_1d (the per-coordinate gradient term).
    // Laplace uses the zero subgradient exactly at the kink x = gamma.
    double grad_1d(double x) const;
    // Second derivative (normal: -1/nu^2; laplace: 0 almost everywhere).
    double curvature_1d(double x) const;

    // Quantile of the logit-scale distribution.
    double logit_quantile(double p) const;
    // Quantile of the induced rate distribution = expit(logit quantile),
    // valid because expit is strictly increasing.
    double rate_quantile(double p) const;

    // One logit-scale draw (used by synthetic generation and by the
    // Monte Carlo prior mean).
    double sample_logit(class Rng& rng) const;
};

// Sum of the 1-D log densities over all coordinates of x.
double log_density(const Prior& prior, const LogitRates& x);

// Monte Carlo estimate of E[expit(X)], X ~ prior, with n_draws >= 1e5.
// Deterministic given the seed.
double prior_mean_rate(const Prior& prior, std::size_t n_draws, std::uint64_t seed);

// Inverse standard-normal CDF (Acklam's rational approximation plus one
// Halley refinement against std::erfc; accurate to ~1e-15 over (0,1)).
double inverse_normal_cdf(double p);

} // namespace sfp
