#include "sfp/trace_stats.hpp"

#include <algorithm>

namespace sfp {

std::int64_t TraceStats::total_samples() const {
    std::int64_t t = 0;
    for (const auto& a : arcs) t += a.n;
    for (const auto& c : nodes) t += c.n;
    return t;
}

std::int64_t TraceStats::total_positive() const {
    std::int64_t t = 0;
    for (const auto& a : arcs) t += a.y;
    for (const auto& c : nodes) t += c.y;
    return t;
}

TraceStats sufficient_stats(const Dataset& data) {
    data.validate();
    TraceStats out;
    out.mode = data.mode;
    if (data.mode == Mode::tracked) {
        // Dense accumulator over the arc grid, then keep observed arcs only.
        const std::size_t nb = data.chain.n_supply();
        std::vector<std::int64_t> n(data.chain.n_test() * nb, 0);
        std::vector<std::int64_t> y(data.chain.n_test() * nb, 0);
        for (const TestRecord& r : data.records) {
            const std::size_t k = r.test_node * nb + *r.supply_node;
            ++n[k];
            if (r.positive) ++y[k];
        }
        for (std::size_t a = 0; a < data.chain.n_test(); ++a) {
            for (std::size_t b = 0; b < nb; ++b) {
                const std::size_t k = a * nb + b;
                if (n[k] > 0) out.arcs.push_back({a, b, n[k], y[k]});
            }
        }
    } else {
        std::vector<std::int64_t> n(data.chain.n_test(), 0);
        std::vector<std::int64_t> y(data.chain.n_test(), 0);
        for (const TestRecord& r : data.records) {
            ++n[r.test_node];
            if (r.positive) ++y[r.test_node];
        }
        for (std::size_t a = 0; a < data.chain.n_test(); ++a) {
            if (n[a] > 0) out.nodes.push_back({a, n[a], y[a]});
        }
    }
    return out;
}

} // namespace sfp
