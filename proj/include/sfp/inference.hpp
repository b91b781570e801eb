#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfp/nuts.hpp"
#include "sfp/types.hpp"

namespace sfp {

enum class Echelon { test, supply };
enum class Category { unset, no_action, investigate, act };

const char* to_string(Echelon e);
const char* to_string(Category c);

// Posterior credible interval for one node's contamination rate.
struct NodeInterval {
    Echelon echelon = Echelon::test;
    std::size_t index = 0; // within its echelon
    std::string label;
    double lower = 0.0;  // alpha/2 quantile
    double median = 0.0;
    double upper = 0.0;  // 1 - alpha/2 quantile
    Category category = Category::unset;
};

// Risk thresholds on the rate scale: l separates "certainly above background"
// from ambiguous, u flags intervals that still reach worrying levels.
struct Thresholds {
    double l = 0.05;
    double u = 0.30;

    void validate() const; // 0 < l < u < 1
};

// Empirical quantile with linear interpolation at position 1 + (n-1)p
// (1-based); the input need not be sorted.
double empirical_quantile(std::span<const double> values, double p);

// Central (1 - alpha) interval plus median per coordinate. Categories are
// left unset. alpha defaults to 0.10 (a 90% interval).
std::vector<NodeInterval> credible_intervals(const PosteriorDraws& draws, double alpha = 0.10);

// Decision rule applied to each interval:
//   act         if lower > l               (rate credibly above l)
//   investigate if lower <= l and upper > u
//   no_action   otherwise (interval contained below the trouble zone).
void classify(std::vector<NodeInterval>& intervals, const Thresholds& thresholds);

// Frequentist baseline on a single trace: normal-approximation interval
// around the observed positive fraction at the 90% level, clipped to [0,1].
struct WaldInterval {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    // Rule-of-thumb adequacy flags: n*p >= 5 and n*(1-p) >= 5.
    bool enough_positive = false;
    bool enough_negative = false;
};

WaldInterval wald_interval(std::int64_t positives, std::int64_t n);

// Empirical sourcing matrix from tracked records: row a is the observed
// share of test node a's samples per supply node. Every test node must have
// at least one record (otherwise its row would be 0/0) -> DataError.
SourcingMatrix estimate_q(const Dataset& tracked_data);

// Sensitivity of untracked inference to sourcing-matrix uncertainty.
// Tracked records are resampled with replacement; each replicate re-estimates
// only the sourcing matrix (per-node totals stay at their observed values),
// then runs the untracked posterior end to end. `full_record` additionally
// lets the per-node counts follow the resample.
struct BootstrapConfig {
    std::size_t replicates = 200;
    std::uint64_t seed = 1;
    bool full_record = false;
    double alpha = 0.10; // interval level inside each replicate
};

// Spread of each interval endpoint across replicates: the 5% and 95%
// quantiles of the per-replicate lower bounds, and likewise for the uppers.
struct EndpointSpread {
    Echelon echelon = Echelon::test;
    std::size_t index = 0;
    std::string label;
    double lower_q05 = 0.0, lower_q95 = 0.0;
    double upper_q05 = 0.0, upper_q95 = 0.0;

    double spread() const {
        return 0.5 * ((lower_q95 - lower_q05) + (upper_q95 - upper_q05));
    }
};

struct BootstrapResult {
    std::vector<std::string> labels; // test then supply
    std::size_t n_test = 0;
    std::size_t n_supply = 0;
    Matrix lowers; // replicates x dim, per-replicate interval lower bounds
    Matrix uppers;
    std::vector<EndpointSpread> summary;
};

BootstrapResult bootstrap_q_sensitivity(const Dataset& tracked_data, const Diagnostic& diag,
                                        const Prior& prior, const SamplerConfig& sampler,
                                        const BootstrapConfig& boot,
                                        Execution exec = Execution::parallel);

} // namespace sfp
