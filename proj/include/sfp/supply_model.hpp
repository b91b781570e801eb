#pragma once

#include <span>

#include "sfp/types.hpp"

namespace sfp {

// Consolidated contamination rates for products moving through the network.
// A product is substandard/falsified if it was compromised at *any* node it
// passed through; stages compose as z = upstream + (1 - upstream) * local.

// Product sourced at supply node b and sold at test node a:
//   z*(a,b) = eta_a + (1 - eta_a) * theta_b.
double consolidated_rate_tracked(double eta_a, double theta_b);

// Product of unknown provenance at test node a, with sourcing mix q_row over
// the supply echelon: z*(a) = eta_a + (1 - eta_a) * sum_b q_ab theta_b.
// q_row must be a probability vector matched to theta's length.
double consolidated_rate_untracked(double eta_a, std::span<const double> theta,
                                   std::span<const double> q_row);

// Three-echelon extension: retail eta, intermediate zeta, manufacturer theta.
//   z = eta + (1 - eta) * (zeta + (1 - zeta) * theta).
double consolidated_rate_three_echelon(double eta_a, double zeta_c, double theta_b);

// Probability that an imperfect diagnostic flags a product whose true
// consolidated rate is z_star:
//   P(flag) = sens * z_star + (1 - spec) * (1 - z_star)
//           = (1 - spec) + (sens + spec - 1) * z_star.
double positive_probability(double z_star, const Diagnostic& diag);

} // namespace sfp
