#include "sfp/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "sfp/error.hpp"

namespace sfp {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("io: cannot open '" + path.string() + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    // Drop trailing blank lines.
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

double parse_number(const std::string& s, const std::string& where) {
    if (s.empty()) throw DataError("io: empty numeric field in " + where);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw DataError("io: '" + s + "' is not a number (" + where + ")");
    }
    return v;
}

struct RawRecord {
    std::string test_label;
    std::string supply_label; // empty = untracked provenance
    bool positive = false;
    std::size_t line_no = 0;
};

std::vector<RawRecord> parse_records_file(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw DataError("io: '" + path.string() + "' is empty");
    }
    const std::vector<std::string> header = split_csv(lines[0]);
    if (header.size() != 3 || header[0] != "test_node" || header[1] != "supply_node" ||
        header[2] != "result") {
        throw DataError("io: '" + path.string() +
                        "' must start with header 'test_node,supply_node,result'");
    }
    std::vector<RawRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        const std::string where = path.filename().string() + " line " + std::to_string(i + 1);
        if (f.size() != 3) {
            throw DataError("io: expected 3 fields, got " + std::to_string(f.size()) + " (" +
                            where + ")");
        }
        if (f[0].empty()) {
            throw DataError("io: missing test node label (" + where + ")");
        }
        RawRecord r;
        r.test_label = f[0];
        r.supply_label = f[1];
        if (f[2] == "0") {
            r.positive = false;
        } else if (f[2] == "1") {
            r.positive = true;
        } else {
            throw DataError("io: result must be 0 or 1, got '" + f[2] + "' (" + where + ")");
        }
        r.line_no = i + 1;
        out.push_back(std::move(r));
    }
    if (out.empty()) {
        throw DataError("io: '" + path.string() + "' contains no data rows");
    }
    return out;
}

// Sourcing file: header row gives the supply-node labels; body rows map a
// test-node label to its weights. Returns labels in file order.
struct RawSourcing {
    std::vector<std::string> supply_labels;
    std::vector<std::string> test_labels;
    std::vector<std::vector<double>> rows;
};

RawSourcing parse_sourcing_file(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.size() < 2) {
        throw DataError("io: sourcing file '" + path.string() + "' needs a header and rows");
    }
    const std::vector<std::string> header = split_csv(lines[0]);
    if (header.size() < 2 || header[0] != "node") {
        throw DataError("io: sourcing file header must be 'node,<supply labels...>'");
    }
    RawSourcing out;
    out.supply_labels.assign(header.begin() + 1, header.end());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        const std::string where = path.filename().string() + " line " + std::to_string(i + 1);
        if (f.size() != header.size()) {
            throw DataError("io: sourcing row has " + std::to_string(f.size()) +
                            " fields, header has " + std::to_string(header.size()) + " (" +
                            where + ")");
        }
        out.test_labels.push_back(f[0]);
        std::vector<double> row;
        row.reserve(f.size() - 1);
        for (std::size_t j = 1; j < f.size(); ++j) row.push_back(parse_number(f[j], where));
        out.rows.push_back(std::move(row));
    }
    return out;
}

void check_label(const std::string& label, const char* what) {
    if (label.find(',') != std::string::npos) {
        throw DataError(std::string("io: ") + what + " label '" + label +
                        "' contains a comma and cannot be written as CSV");
    }
}

} // namespace

Dataset ingest_records(const std::filesystem::path& records_path,
                       const std::optional<std::filesystem::path>& sourcing_path,
                       std::optional<Mode> forced_mode, bool allow_mixed) {
    const std::vector<RawRecord> raw = parse_records_file(records_path);

    std::size_t labeled = 0;
    for (const RawRecord& r : raw) {
        if (!r.supply_label.empty()) ++labeled;
    }
    Mode mode;
    if (forced_mode) {
        mode = *forced_mode;
        if (mode == Mode::tracked && labeled != raw.size()) {
            for (const RawRecord& r : raw) {
                if (r.supply_label.empty()) {
                    throw DataError("io: tracked mode but record at line " +
                                    std::to_string(r.line_no) + " has no supply node");
                }
            }
        }
    } else if (labeled == raw.size()) {
        mode = Mode::tracked;
    } else if (labeled == 0) {
        mode = Mode::untracked;
    } else if (allow_mixed) {
        mode = Mode::untracked;
    } else {
        throw DataError("io: mixed tracked/untracked records in '" + records_path.string() +
                        "' (" + std::to_string(labeled) + " of " + std::to_string(raw.size()) +
                        " labeled); force a mode or allow mixed ingestion");
    }

    Dataset out;
    out.mode = mode;

    std::unordered_map<std::string, std::size_t> test_index;
    for (const RawRecord& r : raw) {
        if (test_index.emplace(r.test_label, out.chain.test_nodes.size()).second) {
            out.chain.test_nodes.push_back(r.test_label);
        }
    }

    if (mode == Mode::tracked) {
        if (sourcing_path) {
            throw DataError("io: a sourcing matrix applies to untracked mode only");
        }
        std::unordered_map<std::string, std::size_t> supply_index;
        for (const RawRecord& r : raw) {
            if (supply_index.emplace(r.supply_label, out.chain.supply_nodes.size()).second) {
                out.chain.supply_nodes.push_back(r.supply_label);
            }
        }
        for (const RawRecord& r : raw) {
            out.records.push_back(
                {test_index.at(r.test_label), supply_index.at(r.supply_label), r.positive});
        }
    } else {
        if (!sourcing_path) {
            throw DataError("io: untracked ingestion requires a sourcing-matrix file");
        }
        const RawSourcing s = parse_sourcing_file(*sourcing_path);
        out.chain.supply_nodes = s.supply_labels;
        std::unordered_map<std::string, std::size_t> row_index;
        for (std::size_t i = 0; i < s.test_labels.size(); ++i) {
            if (!row_index.emplace(s.test_labels[i], i).second) {
                throw DataError("io: duplicate sourcing row for test node '" + s.test_labels[i] +
                                "'");
            }
        }
        std::vector<std::vector<double>> ordered;
        ordered.reserve(out.chain.test_nodes.size());
        for (const std::string& label : out.chain.test_nodes) {
            const auto it = row_index.find(label);
            if (it == row_index.end()) {
                throw DataError("io: sourcing file has no row for test node '" + label + "'");
            }
            ordered.push_back(s.rows[it->second]);
        }
        out.sourcing = SourcingMatrix::from_rows(ordered);
        for (const RawRecord& r : raw) {
            out.records.push_back({test_index.at(r.test_label), std::nullopt, r.positive});
        }
    }

    out.chain.validate();
    out.validate(true);
    return out;
}

std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> per_node_counts(
    const std::filesystem::path& records_path) {
    const std::vector<RawRecord> raw = parse_records_file(records_path);
    std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> out;
    std::unordered_map<std::string, std::size_t> index;
    for (const RawRecord& r : raw) {
        const auto [it, fresh] = index.emplace(r.test_label, out.size());
        if (fresh) out.emplace_back(r.test_label, 0, 0);
        auto& [label, n, y] = out[it->second];
        ++n;
        if (r.positive) ++y;
    }
    return out;
}

void write_records(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream outf(path);
    if (!outf) {
        throw DataError("io: cannot write '" + path.string() + "'");
    }
    outf << "test_node,supply_node,result\n";
    for (const TestRecord& r : data.records) {
        const std::string& t = data.chain.test_nodes[r.test_node];
        check_label(t, "test-node");
        outf << t << ",";
        if (data.mode == Mode::tracked) {
            const std::string& s = data.chain.supply_nodes[*r.supply_node];
            check_label(s, "supply-node");
            outf << s;
        }
        outf << "," << (r.positive ? 1 : 0) << "\n";
    }
}

void write_sourcing_matrix(const SupplyChain& chain, const SourcingMatrix& q,
                           const std::filesystem::path& path) {
    if (q.n_test() != chain.n_test() || q.n_supply() != chain.n_supply()) {
        throw std::invalid_argument("io: sourcing matrix does not match the chain");
    }
    std::ofstream outf(path);
    if (!outf) {
        throw DataError("io: cannot write '" + path.string() + "'");
    }
    outf << "node";
    for (const std::string& s : chain.supply_nodes) {
        check_label(s, "supply-node");
        outf << "," << s;
    }
    outf << "\n";
    for (std::size_t a = 0; a < chain.n_test(); ++a) {
        check_label(chain.test_nodes[a], "test-node");
        outf << chain.test_nodes[a];
        for (std::size_t b = 0; b < chain.n_supply(); ++b) {
            outf << "," << format_full(q(a, b));
        }
        outf << "\n";
    }
}

SourcingMatrix read_sourcing_matrix(const std::filesystem::path& path,
                                    const SupplyChain& chain) {
    const RawSourcing s = parse_sourcing_file(path);
    if (s.supply_labels.size() != chain.n_supply()) {
        throw DataError("io: sourcing file has " + std::to_string(s.supply_labels.size()) +
                        " supply columns, expected " + std::to_string(chain.n_supply()));
    }
    std::vector<std::size_t> col_of(chain.n_supply());
    for (std::size_t b = 0; b < chain.n_supply(); ++b) {
        bool found = false;
        for (std::size_t j = 0; j < s.supply_labels.size(); ++j) {
            if (s.supply_labels[j] == chain.supply_nodes[b]) {
                col_of[b] = j;
                found = true;
                break;
            }
        }
        if (!found) {
            throw DataError("io: sourcing file lacks a column for supply node '" +
                            chain.supply_nodes[b] + "'");
        }
    }
    std::vector<std::vector<double>> ordered(chain.n_test());
    std::vector<bool> seen(chain.n_test(), false);
    for (std::size_t i = 0; i < s.test_labels.size(); ++i) {
        bool matched = false;
        for (std::size_t a = 0; a < chain.n_test(); ++a) {
            if (chain.test_nodes[a] == s.test_labels[i]) {
                if (seen[a]) {
                    throw DataError("io: duplicate sourcing row for test node '" +
                                    s.test_labels[i] + "'");
                }
                std::vector<double> row(chain.n_supply());
                for (std::size_t b = 0; b < chain.n_supply(); ++b) {
                    row[b] = s.rows[i][col_of[b]];
                }
                ordered[a] = std::move(row);
                seen[a] = true;
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw DataError("io: sourcing row '" + s.test_labels[i] +
                            "' does not match any test node");
        }
    }
    for (std::size_t a = 0; a < chain.n_test(); ++a) {
        if (!seen[a]) {
            throw DataError("io: sourcing file has no row for test node '" +
                            chain.test_nodes[a] + "'");
        }
    }
    return SourcingMatrix::from_rows(ordered);
}

void write_rates(const SupplyChain& chain, const RateVector& rates,
                 const std::filesystem::path& path) {
    if (rates.eta.size() != chain.n_test() || rates.theta.size() != chain.n_supply()) {
        throw std::invalid_argument("io: rates do not match the chain");
    }
    std::ofstream outf(path);
    if (!outf) {
        throw DataError("io: cannot write '" + path.string() + "'");
    }
    outf << "echelon,label,rate\n";
    for (std::size_t a = 0; a < chain.n_test(); ++a) {
        check_label(chain.test_nodes[a], "test-node");
        outf << "test," << chain.test_nodes[a] << "," << format_full(rates.eta[a]) << "\n";
    }
    for (std::size_t b = 0; b < chain.n_supply(); ++b) {
        check_label(chain.supply_nodes[b], "supply-node");
        outf << "supply," << chain.supply_nodes[b] << "," << format_full(rates.theta[b]) << "\n";
    }
}

std::pair<SupplyChain, RateVector> read_rates(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw DataError("io: rates file '" + path.string() + "' is empty");
    }
    const std::vector<std::string> header = split_csv(lines[0]);
    if (header.size() != 3 || header[0] != "echelon" || header[1] != "label" ||
        header[2] != "rate") {
        throw DataError("io: rates file must start with header 'echelon,label,rate'");
    }
    SupplyChain chain;
    RateVector rates;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> f = split_csv(lines[i]);
        const std::string where = path.filename().string() + " line " + std::to_string(i + 1);
        if (f.size() != 3) {
            throw DataError("io: expected 3 fields (" + where + ")");
        }
        const double v = parse_number(f[2], where);
        if (f[0] == "test") {
            chain.test_nodes.push_back(f[1]);
            rates.eta.push_back(v);
        } else if (f[0] == "supply") {
            chain.supply_nodes.push_back(f[1]);
            rates.theta.push_back(v);
        } else {
            throw DataError("io: echelon must be 'test' or 'supply', got '" + f[0] + "' (" +
                            where + ")");
        }
    }
    chain.validate();
    rates.validate();
    return {std::move(chain), std::move(rates)};
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_sig4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace sfp
