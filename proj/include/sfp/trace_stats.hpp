#pragma once

#include <cstdint>
#include <vector>

#include "sfp/types.hpp"

namespace sfp {

// Per-trace sample counts. A "trace" is the unit the likelihood factorizes
// over: a (test node, supply node) arc in tracked mode, a test node alone in
// untracked mode. y <= n always; traces with n = 0 never appear.
struct ArcCount {
    std::size_t test_node = 0;
    std::size_t supply_node = 0;
    std::int64_t n = 0; // samples drawn on this arc
    std::int64_t y = 0; // of which flagged positive
};

struct NodeCount {
    std::size_t test_node = 0;
    std::int64_t n = 0;
    std::int64_t y = 0;
};

struct TraceStats {
    Mode mode = Mode::tracked;
    std::vector<ArcCount> arcs;    // tracked mode, ordered by (test, supply) index
    std::vector<NodeCount> nodes;  // untracked mode, ordered by test index

    std::int64_t total_samples() const;
    std::int64_t total_positive() const;
};

// Aggregates raw records into per-trace counts. The record order never
// matters: output is sorted by node index. Throws DataError on index
// inconsistencies (via Dataset::validate).
TraceStats sufficient_stats(const Dataset& data);

} // namespace sfp
