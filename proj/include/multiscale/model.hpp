#pragma once

#include <cstddef>

#include "multiscale/reaction.hpp"
#include "multiscale/spectral.hpp"

namespace multiscale {

/// Complete slow-fast problem
///   du = [A1 u + F1(t,u,v)] dt + Q1 dW1
///   dv = ε⁻¹[A2 v + F2(u,v)] dt + ε^{-1/2} Q2 dW2
/// together with the numerical parameters used to integrate it.
struct ModelSpec {
    SpectralOperator op1;
    SpectralOperator op2;
    ReactionSpec reaction_slow;
    ReactionSpec reaction_fast;
    LyapunovSpec lyapunov;
    GridSpec grid;
    double epsilon = 0.1;
    double horizon = 1.0;
    ModalField u0;
    ModalField v0;
    double theta = 0.0;  // slow-drift truncation level, 0 = raw b
    double gamma1_star = 0.5;
    double gamma2_star = 0.5;
    double holder_beta = 0.2;
    double lambda_exp = 1.0;
    double c_const = 2.0;

    double h_macro = 1e-3;
    double substep_ratio = 0.2;  // fast substep ≤ substep_ratio · ε
    double explosion_bound = 1e6;

    std::size_t n_modes() const noexcept { return grid.n_modes; }
    /// ω = α_{2,1} − L2.
    double omega() const noexcept { return op2.alphas.front() - reaction_fast.L2; }
    bool is_linear_benchmark() const noexcept {
        return reaction_slow.kind == ReactionKind::linear_benchmark &&
               reaction_fast.kind == ReactionKind::linear_benchmark;
    }
};

/// All structural checks: spectra, noise regularity, growth and dissipativity,
/// field sizes, ε ∈ (0,1], T > 0. Throws config_rejected or invalid_parameter.
void validate_model(const ModelSpec& model);

/// Number of fast substeps per macro step, ⌈h/(ρ ε)⌉.
std::size_t fast_substeps(const ModelSpec& model);

}  // namespace multiscale
