#pragma once

// Coupled slow-fast integrator, recorded functionals along a run, and the
// Khasminskii auxiliary processes built by freezing the slow component on
// blocks of length δ and replaying the fast noise.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "multiscale/model.hpp"
#include "multiscale/noise.hpp"
#include "multiscale/spectral.hpp"
#include "multiscale/stats.hpp"

namespace multiscale {

struct SlowFastState {
    ModalField u;
    ModalField v;
    double t = 0.0;
};

struct StreamSet {
    RngStream slow;
    RngStream fast;
};

/// Independent slow and fast streams of one trajectory, both at counter 0.
StreamSet make_streams(std::uint64_t master_seed, std::uint64_t trajectory_id);

/// First-order splitting. Per macro step h the slow state is frozen, the fast
/// state takes n_sub exact-OU substeps of length h/n_sub on the ε-scaled
/// plan, and the slow state takes one exact-OU step whose forcing is the
/// substep average of b(u, v_j).
class CoupledStepper {
public:
    CoupledStepper(const ModelSpec& model, double h_macro);

    double h() const noexcept { return h_; }
    std::size_t n_sub() const noexcept { return n_sub_; }
    const SineTransform& transform() const noexcept { return transform_; }

    /// Advances one macro step; throws state_explosion on guard breach.
    void step(SlowFastState& state, StreamSet& streams);

    /// Modal slow forcing used by the last call to step().
    std::span<const double> last_slow_forcing() const noexcept { return slow_forcing_; }

    /// n_sub fast substeps with the slow argument held at u_phys. When
    /// accumulate is set, the substep average of b(t, u_phys, v_j) is left
    /// in last_slow_forcing() (modal). Shared by step() and the auxiliary
    /// replay so both consume identical arithmetic and noise.
    void advance_fast(std::span<double> v, std::span<const double> u_phys, RngStream& fast, double t,
                      bool accumulate);

private:
    const ModelSpec& model_;
    double h_;
    std::size_t n_sub_;
    SineTransform transform_;
    OUStepPlan slow_plan_, fast_plan_;
    std::vector<double> u_phys_, v_phys_, g_phys_, b_acc_, forcing_, slow_forcing_, scratch_;
};

SlowFastState step_coupled(const SlowFastState& state, const ModelSpec& model, double h_macro, StreamSet& streams);

/// ξ(t) = t^time_power · xi.
struct TestFunction {
    ModalField xi;
    int time_power = 0;

    double weight(double t) const noexcept;
};

struct SimulationOptions {
    std::vector<double> sample_times;  // rounded to the macro grid
    std::vector<TestFunction> test_functions;
    /// Reference drift for the discrepancy ∫⟨F1 − F̄1(u), ξ⟩; unused when empty.
    std::function<ModalField(double, const ModalField&)> fbar;
    bool record_V = false;
    bool store_path = false;  // u, v at every macro step, needed by build_auxiliary
};

struct SlowFastRun {
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory_id = 0;
    double h = 0.0;
    std::size_t n_sub = 0;
    std::size_t n_steps = 0;

    std::vector<SlowFastState> samples;
    std::vector<double> xi_integral;        // ∫₀ᵀ ⟨F1, ξ⟩ per test function
    std::vector<double> discrepancy_sup;    // sup_t |∫₀ᵗ ⟨F1 − F̄1(u), ξ⟩| per test function
    std::vector<double> discrepancy_final;  // value at T
    double V_initial = 0.0;
    double V_integral = 0.0;  // ∫₀ᵀ V(u, v) dt, left-point rule on the macro grid
    double sup_v_norm2 = 0.0;
    std::vector<SlowFastState> path;
};

/// Runs one trajectory of the coupled system on [0, model.horizon] with
/// macro step model.h_macro. Streams derive from (master_seed, trajectory_id).
SlowFastRun simulate_slowfast(const ModelSpec& model, std::uint64_t master_seed, std::uint64_t trajectory_id,
                              const SimulationOptions& options);

/// δ_ε = (2/c) ε |ln ε|^{λ/2}; ε must lie in (0, 1).
double khasminskii_delta(double epsilon, double lambda_exp, double c_const);

struct KhasminskiiPlan {
    double delta = 0.0;
    std::size_t blocks = 0;
    double c_const = 2.0;
};

/// δ from khasminskii_delta (capped at T), blocks = ⌈T/δ⌉.
KhasminskiiPlan make_khasminskii_plan(double epsilon, double T, double lambda_exp, double c_const);
KhasminskiiPlan make_khasminskii_plan(double delta, double T);

struct AuxiliaryPath {
    std::size_t block_steps = 0;  // macro steps per block, max(1, round(δ/h))
    std::vector<ModalField> u_aux;
    std::vector<ModalField> v_aux;
};

/// Re-simulates the fast component on each block with the slow argument
/// frozen at the block's starting snapshot, starting from the recorded v and
/// driven by the same fast noise increments. The run must have stored its path.
AuxiliaryPath build_auxiliary(const SlowFastRun& run, const KhasminskiiPlan& plan, const ModelSpec& model);

struct AuxiliaryTrajectoryError {
    double fast_deviation = 0.0;        // ∫₀ᵀ ‖v_aux − v‖² dt
    std::vector<double> slow_increment;  // per block: max_t ‖u(t) − u(kδ)‖²
};

AuxiliaryTrajectoryError auxiliary_trajectory_error(const SlowFastRun& run, const AuxiliaryPath& aux);

struct AuxiliaryErrorStats {
    MeanEstimate slow_increment;  // block with the largest E max_t ‖u(t) − u(kδ)‖²
    MeanEstimate fast_deviation;  // E ∫₀ᵀ ‖v_aux − v‖² dt
};

AuxiliaryErrorStats auxiliary_error_stats(std::span<const SlowFastRun> orig, std::span<const AuxiliaryPath> aux,
                                          std::size_t n_samples);
/// Same reduction from per-trajectory errors (all with the same block count).
AuxiliaryErrorStats auxiliary_error_stats(std::span<const AuxiliaryTrajectoryError> errors);

/// (ln(t/s))² + (t−s)^β + (t−s)^{2γ1*} for 0 < s ≤ t.
double compute_rho0(double s, double t, double beta, double gamma1_star);

}  // namespace multiscale
