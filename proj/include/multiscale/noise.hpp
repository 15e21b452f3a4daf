#pragma once

// Counter-based Gaussian streams and exact Ornstein-Uhlenbeck updates for
// the diagonal stochastic convolutions of both time scales.
//
// Randomness is Philox4x32-10. A draw is addressed by
// (master_seed, trajectory_id, role, step counter, mode index), so any
// increment can be regenerated without replaying the ones before it.
// Gaussians come from Box-Muller on two 53-bit uniforms per Philox block:
// block (step, pair) yields normals for modes 2*pair and 2*pair+1.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "multiscale/spectral.hpp"

namespace multiscale {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

enum class StreamRole : std::uint32_t { slow_noise = 0, fast_noise = 1, frozen_fast_noise = 2, auxiliary = 3 };

const char* to_string(StreamRole role) noexcept;

/// Value-type random stream. `counter` indexes the next vector of draws.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory_id = 0;
    StreamRole role_tag = StreamRole::auxiliary;
    std::uint64_t counter = 0;

    /// Fill `out` with the standard normals at `counter` (out[k] is mode k+1)
    /// and advance the counter by one.
    void fill_normals(std::span<double> out);
    /// Same draws as fill_normals would produce at `step`, without advancing.
    void normals_at(std::uint64_t step, std::span<double> out) const;
    /// Single draw (mode index 0 of the current counter); advances.
    double normal();
    /// Uniform in [0, 1) from the current counter; advances.
    double uniform();

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    PhiloxKey key() const noexcept;
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trajectory_id, StreamRole role);

/// Q-Wiener increment over a step h: mode k ~ N(0, λ_k² h).
ModalField wiener_increment(const SpectralOperator& op, double h, RngStream& stream);

/// Per-mode coefficients of the exact update of
///   dz = (1/ε_eff)[-α z + f] dt + (1/√ε_eff) λ dW
/// over a step h with f held constant:
///   z' = decay·z + drift_weight·f + noise_std·ξ.
struct OUStepPlan {
    std::vector<double> decay;         // e^{-α h/ε_eff}
    std::vector<double> drift_weight;  // (1 - e^{-α h/ε_eff})/α
    std::vector<double> noise_std;     // sqrt(λ²(1 - e^{-2α h/ε_eff})/(2α))
    double h = 0.0;
    double eps_eff = 1.0;

    std::size_t size() const noexcept { return decay.size(); }
};

OUStepPlan make_plan(const SpectralOperator& op, double h, double eps_eff);

/// Stationary variance λ_k²/(2α_k) of mode k (0-based), independent of ε_eff.
double stationary_variance(const SpectralOperator& op, std::size_t k);

ModalField ou_step(const ModalField& z, const OUStepPlan& plan, const ModalField& forcing, RngStream& stream);

/// In-place form used by the integrators; `scratch` must have plan.size() entries.
void ou_step_inplace(std::span<double> z, const OUStepPlan& plan, std::span<const double> forcing, RngStream& stream,
                     std::span<double> scratch);

}  // namespace multiscale
