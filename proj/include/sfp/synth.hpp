#pragma once

#include <cstdint>
#include <optional>

#include "sfp/priors.hpp"
#include "sfp/types.hpp"

namespace sfp {

// Synthetic-network generator settings. Sourcing rows are drawn from a
// Pareto(shape) law, entries below the row's empirical truncation quantile
// are zeroed, and the survivors renormalized — small shapes give heavy-tailed,
// concentrated sourcing; large shapes approach uniform mixing. The default
// shape is calibrated so a 50x50 network with 1000 tests has a mean trace
// density (distinct observed arcs / all arcs) near 0.12 — with median
// truncation, shape 0.65 centers the density in the 0.08-0.17 band typical
// of the post-market surveillance datasets this generator mimics.
struct GenConfig {
    std::size_t n_test_nodes = 10;
    std::size_t n_supply_nodes = 10;
    std::size_t n_tests = 1000;
    double pareto_shape = 0.65;
    double truncation_quantile = 0.5;
    Mode mode = Mode::tracked;
    Diagnostic diag{1.0, 1.0};
    std::uint64_t seed = 1;
    // Ground-truth rates: explicit, or else drawn per node from rate_prior.
    std::optional<RateVector> rates;
    Prior rate_prior = Prior{PriorFamily::laplace, -2.5, 1.3};

    void validate() const;
};

struct GeneratedChain {
    SupplyChain chain;
    SourcingMatrix sourcing;
    RateVector rates;
};

// Builds the network topology, sourcing matrix and ground-truth rates.
// Deterministic in cfg.seed.
GeneratedChain generate_chain(const GenConfig& cfg);

// Simulates cfg.n_tests post-market samples, allocated evenly across test
// nodes. Each sample picks its supply node from the sourcing row, becomes
// contaminated at the supply stage with probability theta_b or at the test
// stage with probability eta_a, and is then flagged through the diagnostic.
// Tracked mode records the supply node; untracked mode drops it and attaches
// the sourcing matrix to the dataset instead.
Dataset simulate_tests(const SupplyChain& chain, const SourcingMatrix& q,
                       const RateVector& rates, const GenConfig& cfg);

// Fraction of the arc grid observed at least once (tracked datasets only).
double trace_density(const Dataset& data);

} // namespace sfp
