#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfp/likelihood.hpp"
#include "sfp/matrix.hpp"
#include "sfp/priors.hpp"
#include "sfp/types.hpp"

namespace sfp {

// No-U-Turn sampler configuration. Defaults reproduce the reference runs:
// low acceptance target (0.4) with a long warmup.
struct SamplerConfig {
    double target_accept = 0.4;     // dual-averaging acceptance target, in (0,1)
    std::size_t warmup_draws = 5000;
    std::size_t inference_draws = 1000;
    std::size_t max_tree_depth = 10; // valid range [5, 15]
    std::size_t chains = 1;
    std::uint64_t seed = 1;
    // Off by default: when on, a diagonal mass matrix is estimated from the
    // middle half of warmup and the step size re-tuned afterwards.
    bool adapt_mass_matrix = false;

    void validate() const;
};

struct ChainDiagnostics {
    double step_size = 0.0;        // step size used for the inference draws
    std::size_t divergences = 0;   // inference draws with an energy-error blowup
    double mean_accept_stat = 0.0; // mean per-draw acceptance statistic (inference)
    double mean_tree_depth = 0.0;  // mean number of doublings (inference)
    std::size_t max_depth_hits = 0;
};

// Posterior sample container. Rows are chain-major: row = chain *
// draws_per_chain + t. Columns follow the coordinate packing
// [test nodes..., supply nodes...]; rate_draws = expit(logit_draws).
struct PosteriorDraws {
    std::vector<std::string> labels; // test-node labels then supply-node labels
    std::size_t n_test_nodes = 0;
    std::size_t n_supply_nodes = 0;
    std::size_t draws_per_chain = 0;
    Matrix logit_draws;
    Matrix rate_draws;
    std::vector<ChainDiagnostics> chain_diagnostics;

    std::size_t n_chains() const { return chain_diagnostics.size(); }
    std::size_t dim() const { return n_test_nodes + n_supply_nodes; }
};

// Runs one chain of the dynamic (no-U-turn) Hamiltonian sampler on an
// arbitrary differentiable target, starting from `init` (which must have a
// finite log density). Returns inference draws only, one row per draw.
// Exposed mainly so tests can point the sampler at analytic targets.
Matrix sample_chain(const LogDensityModel& model, std::span<const double> init,
                    const SamplerConfig& cfg, std::uint64_t chain_seed,
                    ChainDiagnostics* diag = nullptr);

// Full posterior sampling: builds the model, draws each chain's start point
// from logit coordinates uniform in [gamma - nu, gamma + nu] (retrying until
// the log posterior is finite, at most 100 attempts), runs the chains (in
// parallel when more than one), and returns stacked draws. All randomness
// derives from cfg.seed; results are identical across thread counts.
PosteriorDraws sample(const Dataset& data, const Diagnostic& diag, const Prior& prior,
                      const SamplerConfig& cfg, Execution exec = Execution::parallel);

// Split-R-hat convergence diagnostic per coordinate, computed on the rate
// draws. Each chain is split in half; between/within variances follow the
// usual convention. Degenerate cases: all sequences constant and equal gives
// exactly 1.0; zero within-variance with nonzero between-variance gives +inf.
std::vector<double> split_rhat(const PosteriorDraws& draws);

// Same statistic pooled over several runs (one or more chains each);
// requires at least two runs with identical shapes.
std::vector<double> rhat(const std::vector<PosteriorDraws>& runs);

} // namespace sfp
