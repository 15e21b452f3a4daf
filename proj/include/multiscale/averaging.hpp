#pragma once

// Averaged slow drift F̄1(t,x) = ∫ F1(t,x,y) μ^x(dy), estimated by nested
// frozen-fast simulation (or in closed form on the linear benchmark), the
// averaged slow equation it drives, and V̄(x) = ∫ V(x,y) μ^x(dy).

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "multiscale/model.hpp"
#include "multiscale/noise.hpp"
#include "multiscale/spectral.hpp"

namespace multiscale {

struct AveragedDriftParams {
    double h_fast = 0.01;
    std::optional<double> t_burn;  // defaults to 10/ω
    double t_avg = 20.0;
    std::size_t n_replicas = 8;
    std::size_t n_batches = 20;
    double cache_quantum = 1e-3;  // per-mode rounding of x; 0 disables quantization
    double theta = 0.0;           // truncation applied to b while averaging, 0 = none
    double norm_bound = 1e6;      // ‖x‖ above this is reported as an explosion
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool use_oracle = true;  // closed form on the linear benchmark when θ = 0
};

struct FbarEstimate {
    ModalField drift;
    ModalField std_error;
};

struct AveragedState {
    ModalField u;
    double t = 0.0;
};

/// Closed form a_c x_k/(α_{2,k} + b_c) scaled by b_v, plus b_u x, for the
/// linear benchmark. Throws invalid_parameter for other reaction kinds.
ModalField analytic_Fbar_linear(const ModelSpec& model, double t, const ModalField& x);

/// Nested estimate of F̄1 (F̄1^θ when params.theta > 0). x is rounded to the
/// cache grid first and the fast streams are keyed by the rounded value, so
/// the result is a deterministic function of (quantized x, seed).
FbarEstimate estimate_Fbar(double t, const ModalField& x, const AveragedDriftParams& params, const ModelSpec& model);

/// Rounded slow state used as cache key; identity when quantum is 0.
ModalField quantize_state(const ModalField& x, double quantum);

/// Thread-safe memo of estimate_Fbar on quantized states. Built-in
/// reactions are autonomous, so t does not enter the key.
class FbarCache {
public:
    FbarCache(const ModelSpec& model, AveragedDriftParams params);

    FbarEstimate get(double t, const ModalField& x);
    std::size_t size() const;
    std::size_t hits() const;

private:
    const ModelSpec& model_;
    AveragedDriftParams params_;
    mutable std::mutex mutex_;
    std::map<std::vector<double>, FbarEstimate> table_;
    std::size_t hits_ = 0;
};

/// Drift source for the averaged equation: the closed form when allowed,
/// otherwise a cached nested estimate.
class AveragedDrift {
public:
    AveragedDrift(const ModelSpec& model, const AveragedDriftParams& params);

    bool uses_oracle() const noexcept { return oracle_; }
    FbarEstimate operator()(double t, const ModalField& x);

private:
    const ModelSpec& model_;
    bool oracle_;
    std::unique_ptr<FbarCache> cache_;
};

/// One step of the averaged equation: exponential time differencing of
/// second order (ETD2RK) for the drift, exact OU for the noise. The noise
/// draw is the one ou_step would take on the slow operator at the stream's
/// current counter, so averaged and coupled runs can share slow noise.
AveragedState step_averaged(const AveragedState& state, const ModelSpec& model, AveragedDrift& drift,
                            RngStream& stream, double h);

/// Convenience overload building a one-off drift source.
AveragedState step_averaged(const AveragedState& state, const ModelSpec& model, const AveragedDriftParams& params,
                            RngStream& stream, double h);

struct AveragedTrajectory {
    std::vector<AveragedState> states;  // every `stride`-th macro step plus the terminal one
    double max_drift_std_error = 0.0;   // largest component std_error met along the path
};

AveragedTrajectory simulate_averaged(const ModelSpec& model, AveragedDrift& drift, const ModalField& u0, double T,
                                     double h, RngStream& stream, std::size_t stride = 1);
AveragedTrajectory simulate_averaged(const ModelSpec& model, const AveragedDriftParams& params,
                                     const ModalField& u0, double T, double h, RngStream& stream,
                                     std::size_t stride = 1);

struct VbarEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Time average of V(x, v(t)) along the frozen fast chain at stationarity.
VbarEstimate estimate_Vbar(const ModalField& x, const ModelSpec& model, const AveragedDriftParams& params);

}  // namespace multiscale
