#pragma once

// Ensemble experiments behind the CLI subcommands. Every experiment draws
// trajectory r from streams keyed by (master_seed, r), stores per-trajectory
// results by index and reduces them in index order, so outputs do not
// depend on the worker count.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "multiscale/config.hpp"
#include "multiscale/results.hpp"
#include "multiscale/slowfast.hpp"

namespace multiscale {

/// Runs fn(r) for r in [0, n); trajectories that throw state_explosion are
/// censored (left empty).
std::vector<std::optional<SlowFastRun>> run_ensemble(std::size_t n, unsigned workers,
                                                     const std::function<SlowFastRun(std::size_t)>& fn);

std::size_t count_censored(const std::vector<std::optional<SlowFastRun>>& runs);

ModelSpec with_epsilon(const ModelSpec& model, double epsilon);
ModelSpec with_theta(const ModelSpec& model, double theta);

/// F̄1 source for discrepancy and weak-error references: the closed form on
/// the linear benchmark, otherwise the cached nested estimator.
std::function<ModalField(double, const ModalField&)> make_fbar(const ModelSpec& model,
                                                               const AveragedDriftParams& params);

/// D(ε) per test function and weak errors per observable, paired with the
/// averaged solution (linear benchmark) or a fine-ε reference run driven by
/// the same slow noise.
ResultTable run_convergence_study(const ExperimentConfig& cfg);

/// δ_ε per grid point and the auxiliary-process errors of the Khasminskii
/// construction.
ResultTable run_khasminskii_study(const ExperimentConfig& cfg);

/// Uniform-in-ε moment statistics and their max/min ratios over the grid.
ResultTable run_moment_audit(const ExperimentConfig& cfg);

/// Mean-square slow increments on dyadic time pairs against ρ0, calibrated on
/// the largest ε.
ResultTable run_holder_stats(const ExperimentConfig& cfg);

/// Lockstep runs for each θ under common noise.
ResultTable run_theta_stability(const ExperimentConfig& cfg, std::span<const double> thetas);

/// Largest censored fraction over the rows of a table.
double max_censored_fraction(const ResultTable& table);

/// Invariant-measure averages of the configured observables applied to the
/// fast state at the frozen slow state.
CsvTable run_invariant(const ExperimentConfig& cfg);

/// Averaged-drift estimate per mode at the frozen slow state.
CsvTable run_average(const ExperimentConfig& cfg);

struct SimulateOutput {
    std::vector<std::pair<std::string, CsvTable>> trajectories;  // stem, table
    CsvTable summary;
    std::size_t censored = 0;
    std::size_t total = 0;
};

SimulateOutput run_simulate(const ExperimentConfig& cfg, std::optional<double> epsilon);

}  // namespace multiscale
