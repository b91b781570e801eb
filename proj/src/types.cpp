#include "sfp/types.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "sfp/error.hpp"
#include "sfp/math.hpp"

namespace sfp {

const char* to_string(Mode m) {
    return m == Mode::tracked ? "tracked" : "untracked";
}

void SupplyChain::validate() const {
    if (test_nodes.empty() || supply_nodes.empty()) {
        throw std::invalid_argument("supply_chain: both echelons need at least one node");
    }
    std::unordered_set<std::string> seen;
    for (const auto& label : test_nodes) {
        if (label.empty()) throw std::invalid_argument("supply_chain: empty test-node label");
        if (!seen.insert("T/" + label).second) {
            throw std::invalid_argument("supply_chain: duplicate test-node label '" + label + "'");
        }
    }
    for (const auto& label : supply_nodes) {
        if (label.empty()) throw std::invalid_argument("supply_chain: empty supply-node label");
        if (!seen.insert("S/" + label).second) {
            throw std::invalid_argument("supply_chain: duplicate supply-node label '" + label + "'");
        }
    }
}

SourcingMatrix SourcingMatrix::from_matrix(Matrix m) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw std::invalid_argument("sourcing_matrix: empty matrix");
    }
    for (std::size_t a = 0; a < m.rows(); ++a) {
        double sum = 0.0;
        for (std::size_t b = 0; b < m.cols(); ++b) {
            const double v = m(a, b);
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("sourcing_matrix: negative or non-finite entry in row " +
                                            std::to_string(a));
            }
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("sourcing_matrix: row " + std::to_string(a) +
                                        " sums to " + std::to_string(sum) +
                                        ", outside tolerance 1e-9");
        }
        for (std::size_t b = 0; b < m.cols(); ++b) m(a, b) /= sum;
    }
    SourcingMatrix out;
    out.q_ = std::move(m);
    return out;
}

SourcingMatrix SourcingMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("sourcing_matrix: no rows");
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != cols) {
            throw std::invalid_argument("sourcing_matrix: ragged rows");
        }
        for (std::size_t b = 0; b < cols; ++b) m(a, b) = rows[a][b];
    }
    return from_matrix(std::move(m));
}

void Dataset::validate(bool require_records) const {
    chain.validate();
    if (require_records && records.empty()) {
        throw DataError("dataset: no test records");
    }
    if (mode == Mode::untracked) {
        if (!sourcing.has_value()) {
            throw DataError("dataset: untracked mode requires a sourcing matrix");
        }
        if (sourcing->n_test() != chain.n_test() || sourcing->n_supply() != chain.n_supply()) {
            throw DataError("dataset: sourcing matrix is " + std::to_string(sourcing->n_test()) +
                            "x" + std::to_string(sourcing->n_supply()) + " but the chain is " +
                            std::to_string(chain.n_test()) + "x" + std::to_string(chain.n_supply()));
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TestRecord& r = records[i];
        if (r.test_node >= chain.n_test()) {
            throw DataError("dataset: record " + std::to_string(i) + " test-node index out of range");
        }
        if (mode == Mode::tracked) {
            if (!r.supply_node.has_value()) {
                throw DataError("dataset: record " + std::to_string(i) +
                                " lacks a supply node in tracked mode");
            }
            if (*r.supply_node >= chain.n_supply()) {
                throw DataError("dataset: record " + std::to_string(i) +
                                " supply-node index out of range");
            }
        }
        // Untracked mode ignores any per-record supply labels by definition.
    }
}

void RateVector::validate() const {
    for (double v : eta) {
        if (!(v > 0.0) || !(v < 1.0)) {
            throw std::invalid_argument("rates: test-node rate outside open (0,1)");
        }
    }
    for (double v : theta) {
        if (!(v > 0.0) || !(v < 1.0)) {
            throw std::invalid_argument("rates: supply-node rate outside open (0,1)");
        }
    }
}

LogitRates to_logit(const RateVector& r) {
    r.validate();
    LogitRates x;
    x.alpha.reserve(r.eta.size());
    x.beta.reserve(r.theta.size());
    for (double v : r.eta) x.alpha.push_back(logit(v));
    for (double v : r.theta) x.beta.push_back(logit(v));
    return x;
}

RateVector to_rates(const LogitRates& x) {
    RateVector r;
    r.eta.reserve(x.alpha.size());
    r.theta.reserve(x.beta.size());
    for (double v : x.alpha) r.eta.push_back(expit(v));
    for (double v : x.beta) r.theta.push_back(expit(v));
    return r;
}

Diagnostic::Diagnostic(double sens, double spec) : sensitivity(sens), specificity(spec) {
    if (!(sens > 0.5) || !(sens <= 1.0) || !(spec > 0.5) || !(spec <= 1.0)) {
        throw std::invalid_argument(
            "diagnostic: sensitivity and specificity must lie in (0.5, 1]; got sensitivity=" +
            std::to_string(sens) + ", specificity=" + std::to_string(spec));
    }
}

} // namespace sfp
