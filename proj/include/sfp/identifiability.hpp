#pragma once

#include <cstddef>
#include <optional>

#include "sfp/types.hpp"

namespace sfp {

// A witness is a second, distinct rate configuration producing exactly the
// same consolidated rates trace-by-trace — and therefore the same likelihood
// for every dataset and diagnostic. Its existence shows the data alone cannot
// pin the rates down; only the prior separates the two configurations.
struct Witness {
    RateVector original;
    RateVector perturbed;
    double epsilon = 0.0;     // perturbation actually applied
    double epsilon_max = 0.0; // supremum of feasible perturbations
};

// Tracked-mode witness. Picks an anchor test node a' and moves mass between
// the test echelon and the supply echelon:
//   eta'_a   = eta_a - epsilon * (1 - eta_a) / (1 - eta_{a'})
//   theta'_b = (theta_b * (1 - eta_{a'}) + epsilon) / (1 - eta_{a'} + epsilon)
// Every consolidated rate z*(a,b) is preserved exactly. epsilon must stay
// below epsilon_max = min_a eta_a (1 - eta_{a'}) / (1 - eta_a); passing
// nullopt uses half of that bound. Throws std::invalid_argument naming the
// first violated node when epsilon is infeasible.
Witness tracked_witness(const RateVector& rates, std::size_t anchor_test_node,
                        std::optional<double> epsilon = std::nullopt);

// Untracked-mode witness. Lowers one supply node and compensates every test
// node through its sourcing mix:
//   theta'_b = theta_b - epsilon   (target node only)
//   eta'_a   = (eta_a (1 - Q_a.theta) + epsilon q_ab) / (1 - Q_a.theta + epsilon q_ab)
// preserving every consolidated rate z*(a). Feasibility:
//   epsilon < min( theta_b, min_{a: q_ab > 0} Q_a.theta / q_ab ).
Witness untracked_witness(const RateVector& rates, const SourcingMatrix& q,
                          std::size_t supply_node, std::optional<double> epsilon = std::nullopt);

} // namespace sfp
