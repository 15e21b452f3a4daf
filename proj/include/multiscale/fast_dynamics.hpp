#pragma once

// The fast equation with the slow argument frozen,
//   dv = [A2 v + F2(x, v)] dt + Q2 dW,
// its invariant-measure averages by ergodic time averaging, and the
// common-noise contraction and Lipschitz diagnostics.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiscale/noise.hpp"
#include "multiscale/reaction.hpp"
#include "multiscale/spectral.hpp"

namespace multiscale {

struct FrozenFastConfig {
    ModalField x;  // frozen slow state
    SpectralOperator op2;
    ReactionSpec reaction_fast;
    GridSpec grid;
    double h = 0.01;
    std::optional<double> t_burn;  // defaults to 10/ω
    double t_avg = 10.0;
    std::size_t n_replicas = 8;
    std::uint64_t seed = 0;
    std::uint64_t stream_offset = 0;  // replica r draws from trajectory id stream_offset + r
    std::size_t n_batches = 20;
    unsigned workers = 1;
    std::optional<ModalField> v_init;  // defaults to zero

    double omega() const noexcept { return op2.alphas.front() - reaction_fast.L2; }
    double burn_in() const noexcept { return t_burn ? *t_burn : 10.0 / omega(); }
};

struct InvariantAverageEstimate {
    std::vector<double> mean;
    std::vector<double> std_error;
    double n_effective = 0.0;  // of component 0: sample variance / std_error², capped at the sample count
    double t_burn = 0.0;
    double t_avg = 0.0;
    std::size_t n_replicas = 0;
    std::vector<std::string> warnings;
};

/// Exponential-Euler integrator for the frozen fast equation: linear part and
/// noise exact, g(x, v) held constant over the step.
class FrozenFastStepper {
public:
    explicit FrozenFastStepper(const FrozenFastConfig& cfg);

    void step(std::span<double> v, RngStream& stream);
    const SineTransform& transform() const noexcept { return transform_; }
    std::span<const double> x_phys() const noexcept { return x_phys_; }

private:
    const ReactionSpec& reaction_;
    SineTransform transform_;
    OUStepPlan plan_;
    std::vector<double> x_phys_, v_phys_, g_phys_, forcing_, scratch_;
};

ModalField step_frozen_fast(const ModalField& v, const FrozenFastConfig& cfg, RngStream& stream);

/// Observable evaluated on the fast state; writes `dimension` values.
struct Observable {
    std::size_t dimension = 1;
    std::function<void(const ModalField& v, std::span<const double> v_phys, std::span<double> out)> fn;
};

Observable observable_norm_squared();
Observable observable_coordinate(std::size_t mode);  // ⟨v, e_mode⟩, 1-based
Observable observable_identity(std::size_t n_modes);
Observable observable_constant(double value);

/// Time average over [t_burn, t_burn + t_avg] pooled across replicas, with a
/// batch-means standard error (n_batches per replica). Throws config_rejected
/// when ω ≤ 0.
InvariantAverageEstimate estimate_invariant_average(const FrozenFastConfig& cfg, const Observable& observable);

struct MomentCheckRow {
    double x_norm = 0.0;
    double moment = 0.0;  // E_μ ‖v‖^p
    double std_error = 0.0;
    double ratio = 0.0;   // moment / (c_p (1 + ‖x‖^p))
};

/// E_μ‖v‖^p for x scaled by each factor in `scales`; p ∈ {2, 4}.
std::vector<MomentCheckRow> invariant_moment_check(const FrozenFastConfig& cfg, int p, std::span<const double> scales,
                                                   double c_p = 1.0);

struct ContractionFit {
    double rate = 0.0;  // least-squares slope of log‖v1 − v2‖
    std::vector<double> times;
    std::vector<double> log_distance;
};

/// Two copies started from y1, y2 under one noise path, fitted over [0, 5/ω]
/// (or `horizon` when given). Throws undefined_fit when y1 == y2.
ContractionFit contraction_diagnostic(const FrozenFastConfig& cfg, const ModalField& y1, const ModalField& y2,
                                      std::optional<double> horizon = std::nullopt);

struct LipschitzRatio {
    double sup_ratio = 0.0;    // sup_t ‖v^{x1} − v^{x2}‖ / ‖x1 − x2‖
    double final_ratio = 0.0;  // ratio at the end of the horizon
};

/// Common start and common noise, slow arguments x1, x2, over `horizon`
/// (default t_burn). Throws undefined_fit when x1 == x2.
LipschitzRatio frozen_lipschitz_in_x(const FrozenFastConfig& cfg, const ModalField& x1, const ModalField& x2,
                                     std::optional<double> horizon = std::nullopt);

}  // namespace multiscale
