#pragma once

#include <cmath>
#include <limits>

namespace sfp {

inline constexpr double kRateClamp = 1e-12; // probability floor used inside logs only

// Numerically stable logistic function. Branches on sign so the exponential
// never overflows; for large |x| the result saturates at 0 or 1 in double
// precision, which callers must tolerate.
inline double expit(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Inverse of expit on the open unit interval. Not domain-checked here; callers
// validate p in (0,1) before transforming.
inline double logit(double p) {
    return std::log(p / (1.0 - p));
}

inline double clamp_unit(double z) {
    if (z < kRateClamp) return kRateClamp;
    if (z > 1.0 - kRateClamp) return 1.0 - kRateClamp;
    return z;
}

inline double sq(double x) { return x * x; }

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log(sqrt(2*pi))

} // namespace sfp
