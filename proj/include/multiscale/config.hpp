#pragma once

// Experiment configuration: one JSON document, validated strictly at load.
// Unknown keys are rejected and every structural check on the model runs
// before anything is simulated.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "multiscale/averaging.hpp"
#include "multiscale/model.hpp"
#include "multiscale/slowfast.hpp"

namespace multiscale {

/// Terminal functional φ(u): "coordinate" (⟨u, e_mode⟩) or "norm_squared".
struct ObservableSpec {
    std::string kind = "coordinate";
    std::size_t mode = 1;

    std::string id() const;
    double eval(const ModalField& u) const;
};

struct DumpSpec {
    std::size_t modes = 4;         // modes written per trajectory
    std::size_t trajectories = 1;  // trajectories written in full
    std::size_t stride = 1;        // macro steps between written rows
};

struct ExperimentConfig {
    ModelSpec model;
    std::vector<double> epsilon_grid;
    std::size_t ensemble_size = 100;
    std::vector<TestFunction> test_functions;
    std::vector<ObservableSpec> observables;
    AveragedDriftParams averaging;
    std::optional<ModalField> frozen_x;  // slow state for invariant / average runs
    std::vector<double> theta_sequence;
    std::size_t audit_samples = 20;      // sample times for sup_t moments
    std::size_t vbar_trajectories = 8;   // trajectories entering the V̄ proxy
    std::size_t vbar_times = 5;          // times per trajectory in the V̄ proxy
    bool discrepancy = true;             // record D(ε) in convergence studies
    DumpSpec dump;
    std::string output_dir = "out";
    std::uint64_t master_seed = 0;
    unsigned worker_count = 1;
};

/// Parses and validates. Throws config_rejected (hypothesis::schema for
/// malformed documents, the violated structural condition otherwise).
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config_string(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Validation shared by the parser: model checks plus experiment-level ones.
void validate_experiment(const ExperimentConfig& cfg);

}  // namespace multiscale
