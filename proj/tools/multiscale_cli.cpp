// multiscale: command-line front end for the slow-fast experiments.
//
//   multiscale simulate  --config C [--eps E] [--seed N] [--out DIR] [--workers K]
//   multiscale invariant --config C ...
//   multiscale average   --config C ...
//   multiscale converge  --config C ...
//   multiscale audit     --config C ...
//
// Exit codes: 0 success, 2 configuration or hypothesis rejection,
// 3 more than 20% of trajectories censored by the explosion guard.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "multiscale/config.hpp"
#include "multiscale/errors.hpp"
#include "multiscale/experiments.hpp"
#include "multiscale/results.hpp"

namespace ms = multiscale;

namespace {

constexpr double censor_limit = 0.2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    std::optional<double> eps;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "master seed (overrides the config)");
    app->add_option("--out", f.out, "output directory (overrides the config)");
    app->add_option("--workers", f.workers, "worker threads (overrides MULTISCALE_WORKERS)")
        ->check(CLI::PositiveNumber);
}

ms::ExperimentConfig load(const CommonFlags& f) {
    ms::ExperimentConfig cfg = ms::parse_config(f.config);
    if (f.seed) cfg.master_seed = *f.seed;
    if (f.out) cfg.output_dir = *f.out;
    if (f.workers) {
        cfg.worker_count = *f.workers;
    } else if (const char* env = std::getenv("MULTISCALE_WORKERS")) {
        const int w = std::atoi(env);
        if (w < 1) throw ms::config_rejected(ms::hypothesis::schema, "MULTISCALE_WORKERS must be a positive integer");
        cfg.worker_count = static_cast<unsigned>(w);
    }
    cfg.averaging.seed = cfg.master_seed;
    cfg.averaging.workers = cfg.worker_count;
    return cfg;
}

ms::RunMetadata meta_for(const ms::ExperimentConfig& cfg, const std::string& command) {
    return {cfg.master_seed, ms::config_hash(cfg), command};
}

int finish(double censored_fraction) {
    if (censored_fraction > censor_limit) {
        std::cerr << "error: " << censored_fraction * 100.0 << "% of trajectories censored by the explosion guard\n";
        return 3;
    }
    return 0;
}

int cmd_simulate(const CommonFlags& f) {
    const ms::ExperimentConfig cfg = load(f);
    const ms::SimulateOutput out = ms::run_simulate(cfg, f.eps);
    const auto meta = meta_for(cfg, "simulate");
    for (const auto& [stem, table] : out.trajectories) ms::emit_csv(table, cfg.output_dir, stem, meta);
    ms::emit_csv(out.summary, cfg.output_dir, "summary", meta);
    return finish(static_cast<double>(out.censored) / static_cast<double>(out.total));
}

int cmd_invariant(const CommonFlags& f) {
    const ms::ExperimentConfig cfg = load(f);
    ms::emit_csv(ms::run_invariant(cfg), cfg.output_dir, "invariant", meta_for(cfg, "invariant"));
    return 0;
}

int cmd_average(const CommonFlags& f) {
    const ms::ExperimentConfig cfg = load(f);
    ms::emit_csv(ms::run_average(cfg), cfg.output_dir, "average", meta_for(cfg, "average"));
    return 0;
}

int cmd_converge(const CommonFlags& f) {
    const ms::ExperimentConfig cfg = load(f);
    const ms::ResultTable conv = ms::run_convergence_study(cfg);
    const ms::ResultTable khas = ms::run_khasminskii_study(cfg);
    const auto meta = meta_for(cfg, "converge");
    ms::emit_results(conv, cfg.output_dir, "convergence", meta);
    ms::emit_results(khas, cfg.output_dir, "khasminskii", meta);
    return finish(std::max(ms::max_censored_fraction(conv), ms::max_censored_fraction(khas)));
}

int cmd_audit(const CommonFlags& f) {
    const ms::ExperimentConfig cfg = load(f);
    const auto meta = meta_for(cfg, "audit");
    const ms::ResultTable moments = ms::run_moment_audit(cfg);
    ms::emit_results(moments, cfg.output_dir, "moment_audit", meta);
    double censored = ms::max_censored_fraction(moments);
    if (!cfg.epsilon_grid.empty()) {
        const ms::ResultTable holder = ms::run_holder_stats(cfg);
        ms::emit_results(holder, cfg.output_dir, "holder", meta);
        censored = std::max(censored, ms::max_censored_fraction(holder));
    }
    if (!cfg.theta_sequence.empty()) {
        const ms::ResultTable theta = ms::run_theta_stability(cfg, cfg.theta_sequence);
        ms::emit_results(theta, cfg.output_dir, "theta_stability", meta);
        censored = std::max(censored, ms::max_censored_fraction(theta));
    }
    return finish(censored);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for slow-fast stochastic reaction-diffusion systems"};
    app.set_version_flag("--version", ms::version());
    app.require_subcommand(1);

    CommonFlags flags;
    auto* simulate = app.add_subcommand("simulate", "ensemble of coupled slow-fast trajectories");
    add_common(simulate, flags);
    simulate->add_option("--eps", flags.eps, "time-scale ratio epsilon (overrides the config)");
    auto* invariant = app.add_subcommand("invariant", "invariant-measure averages of the frozen fast equation");
    add_common(invariant, flags);
    auto* average = app.add_subcommand("average", "averaged slow drift at a frozen slow state");
    add_common(average, flags);
    auto* converge = app.add_subcommand("converge", "averaging convergence and Khasminskii study over the epsilon grid");
    add_common(converge, flags);
    auto* audit = app.add_subcommand("audit", "moment, Hoelder and theta-stability audits");
    add_common(audit, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(flags);
        if (invariant->parsed()) return cmd_invariant(flags);
        if (average->parsed()) return cmd_average(flags);
        if (converge->parsed()) return cmd_converge(flags);
        if (audit->parsed()) return cmd_audit(flags);
    } catch (const ms::config_rejected& e) {
        std::cerr << "config rejected: " << e.what() << '\n';
        return 2;
    } catch (const ms::invalid_parameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
