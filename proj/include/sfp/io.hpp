#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sfp/types.hpp"

namespace sfp {

// Records CSV: header `test_node,supply_node,result`, one sample per row,
// result 0 or 1, supply_node may be blank (untracked provenance). Node labels
// are indexed in first-appearance order. A file whose rows all carry supply
// labels is tracked; one with none is untracked; a mixture is a DataError
// unless allow_mixed is set or the mode is forced, in which case it is
// ingested as untracked (labels ignored). Untracked ingestion requires a
// sourcing-matrix file: its column headers define the supply echelon and its
// rows must cover every test node appearing in the records.
Dataset ingest_records(const std::filesystem::path& records_path,
                       const std::optional<std::filesystem::path>& sourcing_path = std::nullopt,
                       std::optional<Mode> forced_mode = std::nullopt,
                       bool allow_mixed = false);

// Inverse of ingest_records for the records file. Deterministic bytes.
void write_records(const Dataset& data, const std::filesystem::path& path);

// Per-test-node (label, samples, positives) pooled over all records in
// first-appearance order; accepts tracked, untracked or mixed files.
std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> per_node_counts(
    const std::filesystem::path& records_path);

// Sourcing CSV: header `node,<supply label>...`; one row per test node with
// its label first. Full precision on write.
void write_sourcing_matrix(const SupplyChain& chain, const SourcingMatrix& q,
                           const std::filesystem::path& path);

// Reads a sourcing CSV and aligns rows/columns to the given chain's label
// order. The file must contain exactly the chain's labels (any order).
SourcingMatrix read_sourcing_matrix(const std::filesystem::path& path,
                                    const SupplyChain& chain);

// Rates CSV: header `echelon,label,rate` with echelon in {test, supply}.
// Reading returns the chain implied by the rows (first-appearance order).
void write_rates(const SupplyChain& chain, const RateVector& rates,
                 const std::filesystem::path& path);
std::pair<SupplyChain, RateVector> read_rates(const std::filesystem::path& path);

// Formats a double with enough digits to round-trip exactly.
std::string format_full(double v);
// Formats with 4 significant digits (human-facing reports).
std::string format_sig4(double v);

} // namespace sfp
