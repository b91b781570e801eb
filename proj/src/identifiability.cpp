#include "sfp/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sfp {
namespace {

void check_index(std::size_t idx, std::size_t n, const char* what) {
    if (idx >= n) {
        throw std::invalid_argument(std::string("identifiability: ") + what + " index " +
                                    std::to_string(idx) + " out of range (size " +
                                    std::to_string(n) + ")");
    }
}

} // namespace

Witness tracked_witness(const RateVector& rates, std::size_t anchor_test_node,
                        std::optional<double> epsilon) {
    rates.validate();
    check_index(anchor_test_node, rates.eta.size(), "anchor test-node");

    const double one_minus_anchor = 1.0 - rates.eta[anchor_test_node];
    // eta'_a > 0 demands epsilon < eta_a (1 - eta_{a'}) / (1 - eta_a) for all a;
    // the supply-side updates stay inside (0,1) automatically.
    double eps_max = std::numeric_limits<double>::infinity();
    std::size_t binding = 0;
    for (std::size_t a = 0; a < rates.eta.size(); ++a) {
        const double bound = rates.eta[a] * one_minus_anchor / (1.0 - rates.eta[a]);
        if (bound < eps_max) {
            eps_max = bound;
            binding = a;
        }
    }

    const double eps = epsilon.value_or(0.5 * eps_max);
    if (!(eps > 0.0)) {
        throw std::invalid_argument("identifiability: epsilon must be positive");
    }
    if (eps >= eps_max) {
        throw std::invalid_argument(
            "identifiability: epsilon " + std::to_string(eps) +
            " pushes test node " + std::to_string(binding) +
            " out of (0,1); feasible epsilon < " + std::to_string(eps_max));
    }

    Witness w;
    w.original = rates;
    w.perturbed = rates;
    w.epsilon = eps;
    w.epsilon_max = eps_max;
    for (std::size_t a = 0; a < rates.eta.size(); ++a) {
        w.perturbed.eta[a] = rates.eta[a] - eps * (1.0 - rates.eta[a]) / one_minus_anchor;
    }
    for (std::size_t b = 0; b < rates.theta.size(); ++b) {
        w.perturbed.theta[b] =
            (rates.theta[b] * one_minus_anchor + eps) / (one_minus_anchor + eps);
    }
    w.perturbed.validate();
    return w;
}

Witness untracked_witness(const RateVector& rates, const SourcingMatrix& q,
                          std::size_t supply_node, std::optional<double> epsilon) {
    rates.validate();
    check_index(supply_node, rates.theta.size(), "supply-node");
    if (q.n_test() != rates.eta.size() || q.n_supply() != rates.theta.size()) {
        throw std::invalid_argument("identifiability: sourcing matrix does not match the rates");
    }

    const std::size_t na = rates.eta.size();
    const std::size_t nb = rates.theta.size();
    std::vector<double> mix(na, 0.0);
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t b = 0; b < nb; ++b) mix[a] += q(a, b) * rates.theta[b];
    }

    // theta'_b > 0 needs epsilon < theta_b; each compensated mix must stay
    // positive: Q_a.theta - epsilon q_ab > 0 wherever q_ab > 0.
    double eps_max = rates.theta[supply_node];
    std::string binding = "supply node " + std::to_string(supply_node);
    for (std::size_t a = 0; a < na; ++a) {
        const double qv = q(a, supply_node);
        if (qv > 0.0) {
            const double bound = mix[a] / qv;
            if (bound < eps_max) {
                eps_max = bound;
                binding = "test node " + std::to_string(a);
            }
        }
    }

    const double eps = epsilon.value_or(0.5 * eps_max);
    if (!(eps > 0.0)) {
        throw std::invalid_argument("identifiability: epsilon must be positive");
    }
    if (eps >= eps_max) {
        throw std::invalid_argument("identifiability: epsilon " + std::to_string(eps) +
                                    " is infeasible (first violated at " + binding +
                                    "); feasible epsilon < " + std::to_string(eps_max));
    }

    Witness w;
    w.original = rates;
    w.perturbed = rates;
    w.epsilon = eps;
    w.epsilon_max = eps_max;
    w.perturbed.theta[supply_node] = rates.theta[supply_node] - eps;
    for (std::size_t a = 0; a < na; ++a) {
        const double qv = q(a, supply_node);
        // Nodes that never source from the perturbed supplier keep their rate.
        if (qv == 0.0) continue;
        const double denom = 1.0 - mix[a] + eps * qv;
        w.perturbed.eta[a] = (rates.eta[a] * (1.0 - mix[a]) + eps * qv) / denom;
    }
    w.perturbed.validate();
    return w;
}

} // namespace sfp
