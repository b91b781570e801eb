#include "sfp/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfp/inference.hpp"
#include "sfp/math.hpp"
#include "sfp/rng.hpp"

namespace sfp {

void GenConfig::validate() const {
    if (n_test_nodes == 0 || n_supply_nodes == 0) {
        throw std::invalid_argument("synth: both echelons need at least one node");
    }
    if (n_tests == 0) {
        throw std::invalid_argument("synth: at least one test is required");
    }
    if (!(pareto_shape > 0.0)) {
        throw std::invalid_argument("synth: Pareto shape must be positive");
    }
    if (!(truncation_quantile >= 0.0) || !(truncation_quantile < 1.0)) {
        throw std::invalid_argument("synth: truncation quantile must lie in [0,1)");
    }
    rate_prior.validate();
    if (rates) {
        rates->validate();
        if (rates->eta.size() != n_test_nodes || rates->theta.size() != n_supply_nodes) {
            throw std::invalid_argument("synth: explicit rates do not match the network size");
        }
    }
}

GeneratedChain generate_chain(const GenConfig& cfg) {
    cfg.validate();
    GeneratedChain out;
    out.chain.test_nodes.reserve(cfg.n_test_nodes);
    out.chain.supply_nodes.reserve(cfg.n_supply_nodes);
    for (std::size_t a = 0; a < cfg.n_test_nodes; ++a) {
        out.chain.test_nodes.push_back("TN" + std::to_string(a + 1));
    }
    for (std::size_t b = 0; b < cfg.n_supply_nodes; ++b) {
        out.chain.supply_nodes.push_back("SN" + std::to_string(b + 1));
    }

    Rng rng(mix_seed(cfg.seed, 0));
    Matrix q(cfg.n_test_nodes, cfg.n_supply_nodes, 0.0);
    std::vector<double> weights(cfg.n_supply_nodes);
    for (std::size_t a = 0; a < cfg.n_test_nodes; ++a) {
        for (std::size_t b = 0; b < cfg.n_supply_nodes; ++b) {
            // Pareto(shape, scale 1) via inverse CDF.
            weights[b] = std::pow(rng.uniform_pos(), -1.0 / cfg.pareto_shape);
        }
        // Zero everything strictly below the row's truncation quantile; the
        // row maximum always survives, so the row can never become empty.
        const double cut = empirical_quantile(weights, cfg.truncation_quantile);
        double sum = 0.0;
        for (std::size_t b = 0; b < cfg.n_supply_nodes; ++b) {
            if (weights[b] >= cut) sum += weights[b];
        }
        for (std::size_t b = 0; b < cfg.n_supply_nodes; ++b) {
            q(a, b) = weights[b] >= cut ? weights[b] / sum : 0.0;
        }
    }
    out.sourcing = SourcingMatrix::from_matrix(std::move(q));

    if (cfg.rates) {
        out.rates = *cfg.rates;
    } else {
        Rng rate_rng(mix_seed(cfg.seed, 1));
        out.rates.eta.reserve(cfg.n_test_nodes);
        out.rates.theta.reserve(cfg.n_supply_nodes);
        for (std::size_t a = 0; a < cfg.n_test_nodes; ++a) {
            out.rates.eta.push_back(expit(cfg.rate_prior.sample_logit(rate_rng)));
        }
        for (std::size_t b = 0; b < cfg.n_supply_nodes; ++b) {
            out.rates.theta.push_back(expit(cfg.rate_prior.sample_logit(rate_rng)));
        }
    }
    out.rates.validate();
    return out;
}

Dataset simulate_tests(const SupplyChain& chain, const SourcingMatrix& q,
                       const RateVector& rates, const GenConfig& cfg) {
    cfg.validate();
    chain.validate();
    rates.validate();
    if (q.n_test() != chain.n_test() || q.n_supply() != chain.n_supply() ||
        rates.eta.size() != chain.n_test() || rates.theta.size() != chain.n_supply()) {
        throw std::invalid_argument("synth: chain, sourcing matrix and rates sizes disagree");
    }

    Dataset out;
    out.chain = chain;
    out.mode = cfg.mode;
    if (cfg.mode == Mode::untracked) out.sourcing = q;
    out.records.reserve(cfg.n_tests);

    Rng rng(mix_seed(cfg.seed, 2));
    const std::size_t na = chain.n_test();
    const std::size_t base = cfg.n_tests / na;
    const std::size_t rem = cfg.n_tests % na;
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t alloc = base + (a < rem ? 1 : 0);
        const auto row = q.row(a);
        for (std::size_t i = 0; i < alloc; ++i) {
            // Supply node from the sourcing mix.
            const double u = rng.uniform();
            std::size_t b = row.size() - 1;
            double cum = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                cum += row[j];
                if (u < cum) {
                    b = j;
                    break;
                }
            }
            // Contamination can happen at either stage.
            const bool at_supply = rng.uniform() < rates.theta[b];
            const bool at_test = rng.uniform() < rates.eta[a];
            const bool bad = at_supply || at_test;
            // Imperfect diagnostic: flag with sens if bad, 1 - spec if not.
            const double flag_prob =
                bad ? cfg.diag.sensitivity : 1.0 - cfg.diag.specificity;
            const bool flagged = rng.uniform() < flag_prob;
            TestRecord rec;
            rec.test_node = a;
            if (cfg.mode == Mode::tracked) rec.supply_node = b;
            rec.positive = flagged;
            out.records.push_back(rec);
        }
    }
    out.validate();
    return out;
}

double trace_density(const Dataset& data) {
    if (data.mode != Mode::tracked) {
        throw std::invalid_argument("synth: trace density is defined for tracked datasets");
    }
    data.validate(true);
    const std::size_t nb = data.chain.n_supply();
    std::vector<char> seen(data.chain.n_test() * nb, 0);
    std::size_t distinct = 0;
    for (const TestRecord& r : data.records) {
        char& flag = seen[r.test_node * nb + *r.supply_node];
        if (!flag) {
            flag = 1;
            ++distinct;
        }
    }
    return static_cast<double>(distinct) /
           static_cast<double>(data.chain.n_test() * nb);
}

} // namespace sfp
