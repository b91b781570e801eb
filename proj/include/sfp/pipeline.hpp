#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sfp/identifiability.hpp"
#include "sfp/inference.hpp"
#include "sfp/io.hpp"
#include "sfp/nuts.hpp"
#include "sfp/synth.hpp"
#include "sfp/types.hpp"

namespace sfp {

// End-to-end subcommand drivers. The CLI binary is a thin flag-parsing shell
// around these, so tests can exercise the full pipelines in-process.

struct InferOptions {
    std::filesystem::path records;
    std::optional<std::filesystem::path> sourcing;
    std::optional<Mode> forced_mode;
    bool allow_mixed = false;
    Diagnostic diag{1.0, 1.0};
    Prior prior = Prior{PriorFamily::laplace, -2.5, 1.3};
    SamplerConfig sampler;
    Thresholds thresholds;
    double alpha = 0.10; // credible-interval level
    Execution exec = Execution::parallel;
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

// Ingests, samples, classifies; writes report.txt, quantiles.csv and
// diagnostics.txt into out_dir. Returns the classified intervals.
std::vector<NodeInterval> run_infer(const InferOptions& opt);

struct SimulateOptions {
    GenConfig gen;
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

// Generates a network and dataset; writes records.csv, sourcing_matrix.csv,
// true_rates.csv and generator.txt. Byte-identical for identical options.
Dataset run_simulate(const SimulateOptions& opt);

struct WitnessOptions {
    std::filesystem::path rates; // rates CSV defining the chain
    Mode mode = Mode::tracked;
    std::optional<std::filesystem::path> sourcing; // untracked mode
    std::string node;                              // anchor (tracked) / target supply (untracked)
    std::optional<double> epsilon;
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

// Builds the non-identifiability witness and writes witness_rates.csv plus
// witness_report.txt (including the largest consolidated-rate deviation).
Witness run_witness(const WitnessOptions& opt);

struct BootstrapOptions {
    std::filesystem::path records; // tracked records
    Diagnostic diag{1.0, 1.0};
    Prior prior = Prior{PriorFamily::laplace, -2.5, 1.3};
    SamplerConfig sampler;
    BootstrapConfig boot;
    Execution exec = Execution::parallel;
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

// Sourcing-uncertainty bootstrap; writes bootstrap_endpoints.csv and
// bootstrap_summary.csv.
BootstrapResult run_bootstrap(const BootstrapOptions& opt);

struct WaldOptions {
    // Either a records file (per-test-node intervals) ...
    std::optional<std::filesystem::path> records;
    // ... or one explicit count pair.
    std::optional<std::int64_t> positives;
    std::optional<std::int64_t> n;
    std::optional<std::filesystem::path> out_file;
    bool quiet = false;
};

void run_wald(const WaldOptions& opt);

} // namespace sfp
