#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sfp/matrix.hpp"

namespace sfp {

enum class Mode { tracked, untracked };

const char* to_string(Mode m);

// Two-echelon network: products flow from supply nodes (wholesale echelon)
// through test nodes (retail echelon) where post-market samples are drawn.
struct SupplyChain {
    std::vector<std::string> test_nodes;
    std::vector<std::string> supply_nodes;

    std::size_t n_test() const { return test_nodes.size(); }
    std::size_t n_supply() const { return supply_nodes.size(); }
    std::size_t dim() const { return test_nodes.size() + supply_nodes.size(); }

    // Requires at least one node per echelon and unique, non-empty labels.
    void validate() const;
};

// Row-stochastic sourcing matrix: q(a,b) is the fraction of test node a's
// volume originating at supply node b. Construction accepts rows whose sums
// deviate from 1 by at most 1e-9 and renormalizes them exactly.
class SourcingMatrix {
public:
    SourcingMatrix() = default;
    static SourcingMatrix from_matrix(Matrix m);
    static SourcingMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t n_test() const { return q_.rows(); }
    std::size_t n_supply() const { return q_.cols(); }
    double operator()(std::size_t a, std::size_t b) const { return q_(a, b); }
    std::span<const double> row(std::size_t a) const { return q_.row(a); }
    const Matrix& matrix() const { return q_; }

private:
    Matrix q_;
};

// One post-market surveillance sample: where it was collected, which supply
// node it came from if the provenance was tracked, and the diagnostic result.
struct TestRecord {
    std::size_t test_node = 0;
    std::optional<std::size_t> supply_node; // engaged only for tracked records
    bool positive = false;                  // true = flagged substandard/falsified
};

struct Dataset {
    SupplyChain chain;
    Mode mode = Mode::tracked;
    std::vector<TestRecord> records;
    std::optional<SourcingMatrix> sourcing; // required in untracked mode

    // Checks structural invariants: indices in range, tracked records carry
    // supply labels, untracked mode has a dimension-matched sourcing matrix.
    // Ingestion passes require_records = true; in-memory datasets may be
    // empty (the likelihood is then an empty sum, i.e. a prior-only target).
    void validate(bool require_records = false) const;
};

// Per-node contamination rates on the probability scale, all in open (0,1).
struct RateVector {
    std::vector<double> eta;   // test-node rates, indexed like chain.test_nodes
    std::vector<double> theta; // supply-node rates, indexed like chain.supply_nodes

    std::size_t dim() const { return eta.size() + theta.size(); }
    // Throws std::invalid_argument if any entry lies outside the open unit
    // interval; rates of exactly 0 or 1 are never representable internally.
    void validate() const;
};

// Same quantities in logit coordinates: alpha = logit(eta), beta = logit(theta).
struct LogitRates {
    std::vector<double> alpha;
    std::vector<double> beta;

    std::size_t dim() const { return alpha.size() + beta.size(); }
};

LogitRates to_logit(const RateVector& r);
RateVector to_rates(const LogitRates& x);

// Imperfect diagnostic device: sensitivity = P(flag | substandard),
// specificity = P(clear | genuine). Both must lie in (0.5, 1], which keeps
// the device informative (sensitivity + specificity > 1).
struct Diagnostic {
    double sensitivity = 1.0;
    double specificity = 1.0;

    Diagnostic() = default;
    Diagnostic(double sens, double spec);
};

} // namespace sfp
