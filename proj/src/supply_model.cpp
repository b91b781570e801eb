#include "sfp/supply_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfp {
namespace {

void check_rate(double v, const char* name) {
    if (!(v > 0.0) || !(v < 1.0)) {
        throw std::invalid_argument(std::string("supply_model: ") + name +
                                    " must lie in open (0,1); got " + std::to_string(v));
    }
}

} // namespace

double consolidated_rate_tracked(double eta_a, double theta_b) {
    check_rate(eta_a, "eta");
    check_rate(theta_b, "theta");
    return eta_a + (1.0 - eta_a) * theta_b;
}

double consolidated_rate_untracked(double eta_a, std::span<const double> theta,
                                   std::span<const double> q_row) {
    check_rate(eta_a, "eta");
    if (theta.size() != q_row.size()) {
        throw std::invalid_argument("supply_model: theta has " + std::to_string(theta.size()) +
                                    " entries but the sourcing row has " +
                                    std::to_string(q_row.size()));
    }
    if (theta.empty()) {
        throw std::invalid_argument("supply_model: empty supply echelon");
    }
    double mix = 0.0;
    double sum = 0.0;
    for (std::size_t b = 0; b < theta.size(); ++b) {
        check_rate(theta[b], "theta");
        const double q = q_row[b];
        if (!(q >= 0.0) || !std::isfinite(q)) {
            throw std::invalid_argument("supply_model: sourcing weights must be non-negative");
        }
        mix += q * theta[b];
        sum += q;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("supply_model: sourcing row sums to " + std::to_string(sum) +
                                    ", expected 1 within 1e-9");
    }
    return eta_a + (1.0 - eta_a) * mix;
}

double consolidated_rate_three_echelon(double eta_a, double zeta_c, double theta_b) {
    check_rate(eta_a, "eta");
    check_rate(zeta_c, "zeta");
    check_rate(theta_b, "theta");
    return eta_a + (1.0 - eta_a) * (zeta_c + (1.0 - zeta_c) * theta_b);
}

double positive_probability(double z_star, const Diagnostic& diag) {
    if (!(z_star > 0.0) || !(z_star < 1.0)) {
        throw std::invalid_argument("supply_model: consolidated rate must lie in open (0,1); got " +
                                    std::to_string(z_star));
    }
    return (1.0 - diag.specificity) + (diag.sensitivity + diag.specificity - 1.0) * z_star;
}

} // namespace sfp
