// Command-line front end: infer | simulate | witness | bootstrap | wald.
// Exit codes: 0 success, 1 usage/argument error, 2 malformed data,
// 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "sfp/error.hpp"
#include "sfp/pipeline.hpp"

namespace {

struct CommonSampler {
    double delta = 0.4;
    std::size_t warmup = 5000;
    std::size_t draws = 1000;
    std::size_t chains = 1;
    std::size_t depth = 10;
    bool mass_adapt = false;
    std::uint64_t seed = 1;

    sfp::SamplerConfig to_config() const {
        sfp::SamplerConfig cfg;
        cfg.target_accept = delta;
        cfg.warmup_draws = warmup;
        cfg.inference_draws = draws;
        cfg.chains = chains;
        cfg.max_tree_depth = depth;
        cfg.adapt_mass_matrix = mass_adapt;
        cfg.seed = seed;
        return cfg;
    }
};

struct CommonPrior {
    std::string family = "laplace";
    double gamma = -2.5;
    double nu = 1.3;
    bool nu_is_variance = false;

    sfp::Prior to_prior() const {
        if (family == "normal") {
            return nu_is_variance ? sfp::Prior::normal_from_variance(gamma, nu)
                                  : sfp::Prior::normal(gamma, nu);
        }
        if (nu_is_variance) {
            throw std::invalid_argument("cli: --nu-is-variance applies to the normal prior");
        }
        return sfp::Prior::laplace(gamma, nu);
    }
};

void add_sampler_flags(CLI::App* cmd, CommonSampler& s) {
    cmd->add_option("--delta", s.delta, "dual-averaging acceptance target (default 0.4)");
    cmd->add_option("--warmup", s.warmup, "warmup draws (default 5000)");
    cmd->add_option("--draws", s.draws, "inference draws (default 1000)");
    cmd->add_option("--chains", s.chains, "number of chains (default 1)");
    cmd->add_option("--depth", s.depth, "max doubling depth, 5..15 (default 10)");
    cmd->add_flag("--mass-adapt", s.mass_adapt, "adapt a diagonal mass matrix during warmup");
    cmd->add_option("--seed", s.seed, "random seed (default 1)");
}

void add_prior_flags(CLI::App* cmd, CommonPrior& p) {
    cmd->add_option("--prior", p.family, "prior family: laplace (default) or normal")
        ->check(CLI::IsMember({"laplace", "normal"}));
    cmd->add_option("--gamma", p.gamma, "prior location on the logit scale (default -2.5)");
    cmd->add_option("--nu", p.nu, "prior spread: sd/scale (default 1.3)");
    cmd->add_flag("--nu-is-variance", p.nu_is_variance,
                  "interpret --nu as a variance (normal prior only)");
}

std::optional<sfp::Mode> parse_mode(const std::string& mode) {
    if (mode.empty()) return std::nullopt;
    if (mode == "tracked") return sfp::Mode::tracked;
    if (mode == "untracked") return sfp::Mode::untracked;
    throw std::invalid_argument("cli: --mode must be tracked or untracked");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Substandard/falsified-product rate inference over two-echelon supply chains"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap OpenMP threads (default: runtime choice)");

    // ---- infer ----
    auto* infer = app.add_subcommand("infer", "posterior inference from a records file");
    sfp::InferOptions inf;
    std::string inf_mode;
    double sens = 1.0, spec = 1.0;
    CommonSampler inf_sampler;
    CommonPrior inf_prior;
    bool inf_serial = false;
    infer->add_option("--records", inf.records, "records CSV")->required();
    infer->add_option("--sourcing", inf.sourcing, "sourcing-matrix CSV (untracked mode)");
    infer->add_option("--mode", inf_mode, "tracked or untracked (default: inferred)");
    infer->add_flag("--allow-mixed", inf.allow_mixed,
                    "ingest mixed files as untracked, ignoring supply labels");
    infer->add_option("--sens", sens, "diagnostic sensitivity (default 1.0)");
    infer->add_option("--spec", spec, "diagnostic specificity (default 1.0)");
    add_prior_flags(infer, inf_prior);
    add_sampler_flags(infer, inf_sampler);
    infer->add_option("--l", inf.thresholds.l, "action threshold (default 0.05)");
    infer->add_option("--u", inf.thresholds.u, "investigation threshold (default 0.30)");
    infer->add_option("--alpha", inf.alpha, "credible-interval miss level (default 0.10)");
    infer->add_option("--out", inf.out_dir, "output directory (default .)");
    infer->add_flag("--serial", inf_serial, "use the serial reference kernels");
    infer->add_flag("--quiet", inf.quiet, "suppress stdout summary");

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic network and dataset");
    sfp::SimulateOptions sim;
    std::string sim_mode = "tracked";
    double sim_sens = 1.0, sim_spec = 1.0;
    CommonPrior sim_prior;
    sim_prior.gamma = -2.5;
    sim_prior.nu = 1.3;
    std::string sim_rates_file;
    simulate->add_option("--test-nodes", sim.gen.n_test_nodes, "test nodes (default 10)");
    simulate->add_option("--supply-nodes", sim.gen.n_supply_nodes, "supply nodes (default 10)");
    simulate->add_option("--tests", sim.gen.n_tests, "total samples (default 1000)");
    simulate->add_option("--pareto-shape", sim.gen.pareto_shape,
                         "sourcing weight Pareto shape");
    simulate->add_option("--truncation", sim.gen.truncation_quantile,
                         "sourcing truncation quantile (default 0.5)");
    simulate->add_option("--mode", sim_mode, "tracked (default) or untracked");
    simulate->add_option("--sens", sim_sens, "diagnostic sensitivity (default 1.0)");
    simulate->add_option("--spec", sim_spec, "diagnostic specificity (default 1.0)");
    simulate->add_option("--rates", sim_rates_file,
                         "ground-truth rates CSV (default: drawn from the rate prior)");
    add_prior_flags(simulate, sim_prior);
    simulate->add_option("--seed", sim.gen.seed, "random seed (default 1)");
    simulate->add_option("--out", sim.out_dir, "output directory (default .)");
    simulate->add_flag("--quiet", sim.quiet, "suppress stdout summary");

    // ---- witness ----
    auto* witness = app.add_subcommand(
        "witness", "construct a non-identifiability witness for a rate configuration");
    sfp::WitnessOptions wit;
    std::string wit_mode = "tracked";
    double wit_eps = -1.0;
    witness->add_option("--rates", wit.rates, "rates CSV defining the chain")->required();
    witness->add_option("--mode", wit_mode, "tracked (default) or untracked");
    witness->add_option("--sourcing", wit.sourcing, "sourcing CSV (untracked mode)");
    witness->add_option("--node", wit.node,
                        "anchor test node (tracked) / target supply node (untracked)")
        ->required();
    witness->add_option("--epsilon", wit_eps,
                        "perturbation size (default: half the feasible maximum)");
    witness->add_option("--out", wit.out_dir, "output directory (default .)");
    witness->add_flag("--quiet", wit.quiet, "suppress stdout summary");

    // ---- bootstrap ----
    auto* bootstrap = app.add_subcommand(
        "bootstrap", "sourcing-matrix sensitivity of untracked inference (tracked records)");
    sfp::BootstrapOptions boo;
    double boo_sens = 1.0, boo_spec = 1.0;
    CommonSampler boo_sampler;
    CommonPrior boo_prior;
    bool boo_serial = false;
    bootstrap->add_option("--records", boo.records, "tracked records CSV")->required();
    bootstrap->add_option("--replicates", boo.boot.replicates,
                          "bootstrap replicates (default 200)");
    bootstrap->add_flag("--full-record", boo.boot.full_record,
                        "let per-node totals follow the resample too");
    bootstrap->add_option("--boot-seed", boo.boot.seed, "resampling seed (default 1)");
    bootstrap->add_option("--alpha", boo.boot.alpha,
                          "interval miss level inside replicates (default 0.10)");
    bootstrap->add_option("--sens", boo_sens, "diagnostic sensitivity (default 1.0)");
    bootstrap->add_option("--spec", boo_spec, "diagnostic specificity (default 1.0)");
    add_prior_flags(bootstrap, boo_prior);
    add_sampler_flags(bootstrap, boo_sampler);
    bootstrap->add_option("--out", boo.out_dir, "output directory (default .)");
    bootstrap->add_flag("--serial", boo_serial, "use the serial reference kernels");
    bootstrap->add_flag("--quiet", boo.quiet, "suppress stdout summary");

    // ---- wald ----
    auto* wald = app.add_subcommand("wald", "frequentist per-node baseline intervals");
    sfp::WaldOptions wal;
    std::int64_t wal_pos = -1, wal_n = -1;
    wald->add_option("--records", wal.records, "records CSV (per-test-node table)");
    wald->add_option("--positives", wal_pos, "positive count (single interval)");
    wald->add_option("--n", wal_n, "sample count (single interval)");
    wald->add_option("--out", wal.out_file, "write the CSV here instead of stdout only");
    wald->add_flag("--quiet", wal.quiet, "suppress stdout if --out is given");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (*infer) {
            inf.forced_mode = parse_mode(inf_mode);
            inf.diag = sfp::Diagnostic(sens, spec);
            inf.prior = inf_prior.to_prior();
            inf.sampler = inf_sampler.to_config();
            inf.exec = inf_serial ? sfp::Execution::serial : sfp::Execution::parallel;
            sfp::run_infer(inf);
        } else if (*simulate) {
            const auto mode = parse_mode(sim_mode);
            if (mode) sim.gen.mode = *mode;
            sim.gen.diag = sfp::Diagnostic(sim_sens, sim_spec);
            sim.gen.rate_prior = sim_prior.to_prior();
            if (!sim_rates_file.empty()) {
                const auto [chain, rates] = sfp::read_rates(sim_rates_file);
                if (chain.n_test() != sim.gen.n_test_nodes ||
                    chain.n_supply() != sim.gen.n_supply_nodes) {
                    sim.gen.n_test_nodes = chain.n_test();
                    sim.gen.n_supply_nodes = chain.n_supply();
                }
                sim.gen.rates = rates;
            }
            sfp::run_simulate(sim);
        } else if (*witness) {
            const auto mode = parse_mode(wit_mode);
            if (mode) wit.mode = *mode;
            if (wit_eps >= 0.0) wit.epsilon = wit_eps;
            sfp::run_witness(wit);
        } else if (*bootstrap) {
            boo.diag = sfp::Diagnostic(boo_sens, boo_spec);
            boo.prior = boo_prior.to_prior();
            boo.sampler = boo_sampler.to_config();
            boo.exec = boo_serial ? sfp::Execution::serial : sfp::Execution::parallel;
            sfp::run_bootstrap(boo);
        } else if (*wald) {
            if (wal_pos >= 0) wal.positives = wal_pos;
            if (wal_n >= 0) wal.n = wal_n;
            sfp::run_wald(wal);
        }
    } catch (const sfp::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sfp::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
