#include "sfp/priors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sfp/math.hpp"
#include "sfp/rng.hpp"

namespace sfp {

const char* to_string(PriorFamily f) {
    return f == PriorFamily::normal ? "normal" : "laplace";
}

Prior Prior::normal(double gamma, double nu) {
    Prior p{PriorFamily::normal, gamma, nu};
    p.validate();
    return p;
}

Prior Prior::laplace(double gamma, double nu) {
    Prior p{PriorFamily::laplace, gamma, nu};
    p.validate();
    return p;
}

Prior Prior::normal_from_variance(double gamma, double variance) {
    if (!(variance > 0.0)) {
        throw std::invalid_argument("priors: variance must be positive");
    }
    return normal(gamma, std::sqrt(variance));
}

void Prior::validate() const {
    if (!std::isfinite(gamma)) {
        throw std::invalid_argument("priors: location must be finite");
    }
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("priors: spread parameter must be positive; got " +
                                    std::to_string(nu));
    }
}

double Prior::log_density_1d(double x) const {
    if (family == PriorFamily::normal) {
        const double z = (x - gamma) / nu;
        return -0.5 * z * z - std::log(nu) - kLogSqrt2Pi;
    }
    return -std::fabs(x - gamma) / nu - std::log(2.0 * nu);
}

double Prior::grad_1d(double x) const {
    if (family == PriorFamily::normal) {
        return -(x - gamma) / (nu * nu);
    }
    if (x > gamma) return -1.0 / nu;
    if (x < gamma) return 1.0 / nu;
    return 0.0; // zero subgradient at the kink
}

double Prior::curvature_1d(double x) const {
    if (family == PriorFamily::normal) {
        return -1.0 / (nu * nu);
    }
    (void)x;
    return 0.0;
}

double Prior::logit_quantile(double p) const {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("priors: quantile level must lie in open (0,1)");
    }
    if (family == PriorFamily::normal) {
        return gamma + nu * inverse_normal_cdf(p);
    }
    if (p < 0.5) return gamma + nu * std::log(2.0 * p);
    return gamma - nu * std::log(2.0 * (1.0 - p));
}

double Prior::rate_quantile(double p) const {
    return expit(logit_quantile(p));
}

double Prior::sample_logit(Rng& rng) const {
    if (family == PriorFamily::normal) {
        return gamma + nu * rng.normal();
    }
    // Inverse-CDF sampling for Laplace; u is kept strictly inside (0,1).
    for (;;) {
        const double u = rng.uniform_pos();
        if (u <= 0.5) return gamma + nu * std::log(2.0 * u);
        if (u < 1.0) return gamma - nu * std::log(2.0 * (1.0 - u));
    }
}

double log_density(const Prior& prior, const LogitRates& x) {
    prior.validate();
    double total = 0.0;
    for (double v : x.alpha) total += prior.log_density_1d(v);
    for (double v : x.beta) total += prior.log_density_1d(v);
    return total;
}

double prior_mean_rate(const Prior& prior, std::size_t n_draws, std::uint64_t seed) {
    prior.validate();
    if (n_draws < 100000) {
        throw std::invalid_argument("priors: prior_mean_rate needs at least 1e5 draws");
    }
    Rng rng(seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        sum += expit(prior.sample_logit(rng));
    }
    return sum / static_cast<double>(n_draws);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("priors: inverse normal CDF defined on open (0,1)");
    }
    // Reflect the upper half onto the lower half: 1 - p is exact for
    // p >= 0.5, and the erfc term in the refinement below is then always the
    // small tail value, never the cancellation-prone complement.
    if (p > 0.5) return -inverse_normal_cdf(1.0 - p);
    // Acklam's rational approximation (central and lower-tail branches; the
    // upper tail is handled by the reflection above).
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // One Halley step against the exact CDF expressed through erfc brings the
    // approximation to full double precision.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

} // namespace sfp
