#include "sfp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sfp/error.hpp"
#include "sfp/identifiability.hpp"
#include "sfp/supply_model.hpp"
#include "sfp/trace_stats.hpp"

namespace sfp {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("io: cannot write '" + path.string() + "'");
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir)) {
        throw DataError("io: cannot create output directory '" + dir.string() + "'");
    }
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_quantiles_csv(const fs::path& path, const std::vector<NodeInterval>& ivs) {
    std::ofstream out = open_out(path);
    out << "node,echelon,lower,median,upper,category\n";
    for (const NodeInterval& iv : ivs) {
        out << iv.label << "," << to_string(iv.echelon) << "," << format_full(iv.lower) << ","
            << format_full(iv.median) << "," << format_full(iv.upper) << ","
            << to_string(iv.category) << "\n";
    }
}

} // namespace

std::vector<NodeInterval> run_infer(const InferOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    opt.thresholds.validate();
    const Dataset data = ingest_records(opt.records, opt.sourcing, opt.forced_mode,
                                        opt.allow_mixed);
    const TraceStats stats = sufficient_stats(data);

    const PosteriorDraws draws = sample(data, opt.diag, opt.prior, opt.sampler, opt.exec);
    const std::vector<double> rhats = split_rhat(draws);
    std::vector<NodeInterval> intervals = credible_intervals(draws, opt.alpha);
    classify(intervals, opt.thresholds);
    const double seconds = elapsed_seconds(start);

    ensure_dir(opt.out_dir);
    write_quantiles_csv(opt.out_dir / "quantiles.csv", intervals);

    // Per-node sample counts for the report.
    std::vector<std::int64_t> node_n(data.chain.n_test(), 0), node_y(data.chain.n_test(), 0);
    for (const TestRecord& r : data.records) {
        ++node_n[r.test_node];
        if (r.positive) ++node_y[r.test_node];
    }

    {
        std::ofstream out = open_out(opt.out_dir / "report.txt");
        out << "SFP rate inference report\n";
        out << "=========================\n";
        out << "mode: " << to_string(data.mode) << "\n";
        out << "test nodes: " << data.chain.n_test()
            << "  supply nodes: " << data.chain.n_supply()
            << "  records: " << data.records.size() << "\n";
        out << "diagnostic: sensitivity " << format_sig4(opt.diag.sensitivity)
            << ", specificity " << format_sig4(opt.diag.specificity) << "\n";
        out << "prior: " << to_string(opt.prior.family) << "(gamma "
            << format_sig4(opt.prior.gamma) << ", nu " << format_sig4(opt.prior.nu) << ")\n";
        out << "sampler: " << opt.sampler.chains << " chain(s), "
            << opt.sampler.warmup_draws << " warmup + " << opt.sampler.inference_draws
            << " draws, target accept " << format_sig4(opt.sampler.target_accept)
            << ", seed " << opt.sampler.seed << "\n";
        out << "thresholds: l " << format_sig4(opt.thresholds.l) << ", u "
            << format_sig4(opt.thresholds.u) << "\n";
        out << "runtime: " << format_sig4(seconds) << " s\n\n";

        std::size_t n_act = 0, n_inv = 0, n_ok = 0;
        for (const NodeInterval& iv : intervals) {
            if (iv.category == Category::act) ++n_act;
            if (iv.category == Category::investigate) ++n_inv;
            if (iv.category == Category::no_action) ++n_ok;
        }
        out << "classification: " << n_act << " act, " << n_inv << " investigate, " << n_ok
            << " no-action\n\n";
        out << "node            echelon   n      y      5%       50%      95%      category\n";
        out << "--------------- --------- ------ ------ -------- -------- -------- -----------\n";
        char line[256];
        for (const NodeInterval& iv : intervals) {
            std::int64_t n = 0, y = 0;
            if (iv.echelon == Echelon::test) {
                n = node_n[iv.index];
                y = node_y[iv.index];
            } else if (data.mode == Mode::tracked) {
                for (const ArcCount& arc : stats.arcs) {
                    if (arc.supply_node == iv.index) {
                        n += arc.n;
                        y += arc.y;
                    }
                }
            }
            std::snprintf(line, sizeof(line), "%-15s %-9s %-6lld %-6lld %-8s %-8s %-8s %s\n",
                          iv.label.c_str(), to_string(iv.echelon),
                          static_cast<long long>(n), static_cast<long long>(y),
                          format_sig4(iv.lower).c_str(), format_sig4(iv.median).c_str(),
                          format_sig4(iv.upper).c_str(), to_string(iv.category));
            out << line;
        }
    }

    {
        std::ofstream out = open_out(opt.out_dir / "diagnostics.txt");
        out << "runtime_seconds " << format_full(seconds) << "\n";
        for (std::size_t c = 0; c < draws.n_chains(); ++c) {
            const ChainDiagnostics& d = draws.chain_diagnostics[c];
            out << "chain " << c << ": step_size " << format_full(d.step_size)
                << " divergences " << d.divergences << " mean_accept "
                << format_full(d.mean_accept_stat) << " mean_tree_depth "
                << format_full(d.mean_tree_depth) << " max_depth_hits " << d.max_depth_hits
                << "\n";
        }
        out << "split_rhat";
        for (double r : rhats) out << " " << format_full(r);
        out << "\n";
    }

    if (!opt.quiet) {
        std::cout << "wrote " << (opt.out_dir / "report.txt").string() << ", quantiles.csv, "
                  << "diagnostics.txt (" << format_sig4(seconds) << " s)\n";
    }
    return intervals;
}

Dataset run_simulate(const SimulateOptions& opt) {
    opt.gen.validate();
    const GeneratedChain gc = generate_chain(opt.gen);
    const Dataset data = simulate_tests(gc.chain, gc.sourcing, gc.rates, opt.gen);

    ensure_dir(opt.out_dir);
    write_records(data, opt.out_dir / "records.csv");
    write_sourcing_matrix(gc.chain, gc.sourcing, opt.out_dir / "sourcing_matrix.csv");
    write_rates(gc.chain, gc.rates, opt.out_dir / "true_rates.csv");
    {
        std::ofstream out = open_out(opt.out_dir / "generator.txt");
        out << "mode " << to_string(opt.gen.mode) << "\n";
        out << "test_nodes " << opt.gen.n_test_nodes << "\n";
        out << "supply_nodes " << opt.gen.n_supply_nodes << "\n";
        out << "tests " << opt.gen.n_tests << "\n";
        out << "pareto_shape " << format_full(opt.gen.pareto_shape) << "\n";
        out << "truncation_quantile " << format_full(opt.gen.truncation_quantile) << "\n";
        out << "sensitivity " << format_full(opt.gen.diag.sensitivity) << "\n";
        out << "specificity " << format_full(opt.gen.diag.specificity) << "\n";
        out << "seed " << opt.gen.seed << "\n";
        if (opt.gen.mode == Mode::tracked) {
            out << "trace_density " << format_full(trace_density(data)) << "\n";
        }
    }
    if (!opt.quiet) {
        std::cout << "wrote " << (opt.out_dir / "records.csv").string()
                  << " (" << data.records.size() << " records)\n";
    }
    return data;
}

Witness run_witness(const WitnessOptions& opt) {
    const auto [chain, rates] = read_rates(opt.rates);

    Witness w;
    std::optional<SourcingMatrix> q;
    std::size_t node_index = 0;
    if (opt.mode == Mode::tracked) {
        bool found = false;
        for (std::size_t a = 0; a < chain.n_test(); ++a) {
            if (chain.test_nodes[a] == opt.node) {
                node_index = a;
                found = true;
                break;
            }
        }
        if (!found) {
            throw DataError("witness: anchor test node '" + opt.node + "' not in rates file");
        }
        w = tracked_witness(rates, node_index, opt.epsilon);
    } else {
        if (!opt.sourcing) {
            throw DataError("witness: untracked mode requires a sourcing-matrix file");
        }
        bool found = false;
        for (std::size_t b = 0; b < chain.n_supply(); ++b) {
            if (chain.supply_nodes[b] == opt.node) {
                node_index = b;
                found = true;
                break;
            }
        }
        if (!found) {
            throw DataError("witness: target supply node '" + opt.node + "' not in rates file");
        }
        q = read_sourcing_matrix(*opt.sourcing, chain);
        w = untracked_witness(rates, *q, node_index, opt.epsilon);
    }

    // Largest consolidated-rate deviation over all traces.
    double max_dev = 0.0;
    if (opt.mode == Mode::tracked) {
        for (std::size_t a = 0; a < chain.n_test(); ++a) {
            for (std::size_t b = 0; b < chain.n_supply(); ++b) {
                const double z0 = consolidated_rate_tracked(w.original.eta[a],
                                                            w.original.theta[b]);
                const double z1 = consolidated_rate_tracked(w.perturbed.eta[a],
                                                            w.perturbed.theta[b]);
                max_dev = std::max(max_dev, std::fabs(z0 - z1));
            }
        }
    } else {
        for (std::size_t a = 0; a < chain.n_test(); ++a) {
            const double z0 =
                consolidated_rate_untracked(w.original.eta[a], w.original.theta, q->row(a));
            const double z1 =
                consolidated_rate_untracked(w.perturbed.eta[a], w.perturbed.theta, q->row(a));
            max_dev = std::max(max_dev, std::fabs(z0 - z1));
        }
    }

    ensure_dir(opt.out_dir);
    {
        std::ofstream out = open_out(opt.out_dir / "witness_rates.csv");
        out << "echelon,label,original_rate,perturbed_rate\n";
        for (std::size_t a = 0; a < chain.n_test(); ++a) {
            out << "test," << chain.test_nodes[a] << "," << format_full(w.original.eta[a]) << ","
                << format_full(w.perturbed.eta[a]) << "\n";
        }
        for (std::size_t b = 0; b < chain.n_supply(); ++b) {
            out << "supply," << chain.supply_nodes[b] << "," << format_full(w.original.theta[b])
                << "," << format_full(w.perturbed.theta[b]) << "\n";
        }
    }
    {
        std::ofstream out = open_out(opt.out_dir / "witness_report.txt");
        out << "Non-identifiability witness (" << to_string(opt.mode) << " mode)\n";
        out << "node: " << opt.node << "\n";
        out << "epsilon: " << format_full(w.epsilon) << "\n";
        out << "epsilon_max: " << format_full(w.epsilon_max) << "\n";
        out << "max consolidated-rate deviation: " << format_full(max_dev) << "\n";
        out << "Both rate configurations yield identical likelihoods for every dataset\n"
            << "observed through these traces; surveillance data alone cannot tell\n"
            << "them apart.\n";
    }
    if (!opt.quiet) {
        std::cout << "wrote witness_rates.csv (max trace deviation " << format_sig4(max_dev)
                  << ")\n";
    }
    return w;
}

BootstrapResult run_bootstrap(const BootstrapOptions& opt) {
    const Dataset data = ingest_records(opt.records, std::nullopt, Mode::tracked, false);
    const BootstrapResult res =
        bootstrap_q_sensitivity(data, opt.diag, opt.prior, opt.sampler, opt.boot, opt.exec);

    ensure_dir(opt.out_dir);
    {
        std::ofstream out = open_out(opt.out_dir / "bootstrap_endpoints.csv");
        out << "replicate,node,echelon,lower,upper\n";
        for (std::size_t r = 0; r < res.lowers.rows(); ++r) {
            for (std::size_t j = 0; j < res.labels.size(); ++j) {
                const bool is_test = j < res.n_test;
                out << r << "," << res.labels[j] << "," << (is_test ? "test" : "supply") << ","
                    << format_full(res.lowers(r, j)) << "," << format_full(res.uppers(r, j))
                    << "\n";
            }
        }
    }
    {
        std::ofstream out = open_out(opt.out_dir / "bootstrap_summary.csv");
        out << "node,echelon,lower_q05,lower_q95,upper_q05,upper_q95,spread\n";
        for (const EndpointSpread& s : res.summary) {
            out << s.label << "," << to_string(s.echelon) << "," << format_full(s.lower_q05)
                << "," << format_full(s.lower_q95) << "," << format_full(s.upper_q05) << ","
                << format_full(s.upper_q95) << "," << format_full(s.spread()) << "\n";
        }
    }
    if (!opt.quiet) {
        std::cout << "wrote bootstrap_summary.csv (" << res.lowers.rows() << " replicates)\n";
    }
    return res;
}

void run_wald(const WaldOptions& opt) {
    std::ostringstream body;
    body << "node,n,positives,estimate,lower,upper,sample_size_ok\n";
    if (opt.records) {
        for (const auto& [label, n, y] : per_node_counts(*opt.records)) {
            const WaldInterval w = wald_interval(y, n);
            body << label << "," << n << "," << y << "," << format_full(w.estimate) << ","
                 << format_full(w.lower) << "," << format_full(w.upper) << ","
                 << ((w.enough_positive && w.enough_negative) ? 1 : 0) << "\n";
        }
    } else if (opt.positives && opt.n) {
        const WaldInterval w = wald_interval(*opt.positives, *opt.n);
        body << "sample," << *opt.n << "," << *opt.positives << "," << format_full(w.estimate)
             << "," << format_full(w.lower) << "," << format_full(w.upper) << ","
             << ((w.enough_positive && w.enough_negative) ? 1 : 0) << "\n";
    } else {
        throw std::invalid_argument(
            "wald: provide either a records file or --positives with --n");
    }
    if (opt.out_file) {
        std::ofstream out = open_out(*opt.out_file);
        out << body.str();
    }
    if (!opt.quiet || !opt.out_file) {
        std::cout << body.str();
    }
}

} // namespace sfp
