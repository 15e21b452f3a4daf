#include "multiscale/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multiscale/errors.hpp"

namespace multiscale {

namespace {

void validate_noise_regularity(const SpectralOperator& op, const char* which) {
    const bool silent = std::all_of(op.lambdas.begin(), op.lambdas.end(), [](double l) { return l == 0.0; });
    if (silent) return;
    if (!(op.gamma_reg > 0.0))
        throw config_rejected(hypothesis::noise_regularity, std::string(which) + ": gamma must be > 0");
    if (!check_noise_regularity(op.alpha_exponent, op.lambda_exponent, op.gamma_reg)) {
        const double exponent = op.alpha_exponent * (2.0 * op.gamma_reg - 1.0) - 2.0 * op.lambda_exponent;
        throw config_rejected(hypothesis::noise_regularity, std::string(which) + ": series exponent " +
                                                                std::to_string(exponent) + " is not < -1");
    }
}

}  // namespace

void validate_model(const ModelSpec& model) {
    validate_grid(model.grid);
    validate_spectrum(model.op1);
    validate_spectrum(model.op2);
    const std::size_t n = model.grid.n_modes;
    if (model.op1.size() != n || model.op2.size() != n)
        throw invalid_parameter("ModelSpec: operator size differs from grid n_modes");
    if (model.u0.size() != n || model.v0.size() != n)
        throw invalid_parameter("ModelSpec: initial data size differs from grid n_modes");
    validate_noise_regularity(model.op1, "slow operator");
    validate_noise_regularity(model.op2, "fast operator");
    validate_slow_reaction(model.reaction_slow);
    validate_fast_reaction(model.reaction_fast);
    validate_dissipativity(model.op2.alphas.front(), model.reaction_fast.L2);
    if (!(model.epsilon > 0.0) || model.epsilon > 1.0) throw invalid_parameter("ModelSpec: epsilon must be in (0,1]");
    if (!(model.horizon > 0.0)) throw invalid_parameter("ModelSpec: horizon must be > 0");
    if (!(model.h_macro > 0.0)) throw invalid_parameter("ModelSpec: h_macro must be > 0");
    if (!(model.substep_ratio > 0.0)) throw invalid_parameter("ModelSpec: substep_ratio must be > 0");
    if (!(model.theta >= 0.0) || model.theta > 1.0) throw invalid_parameter("ModelSpec: theta must be in [0,1]");
    if (!(model.explosion_bound > 0.0)) throw invalid_parameter("ModelSpec: explosion_bound must be > 0");
    if (!(model.lyapunov.c_V > 0.0)) throw invalid_parameter("ModelSpec: c_V must be > 0");
}

std::size_t fast_substeps(const ModelSpec& model) {
    const double ratio = model.h_macro / (model.substep_ratio * model.epsilon);
    // tolerate representation error so that h = 0.2ε exactly gives one substep
    const double n = std::ceil(ratio * (1.0 - 1e-12));
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

}  // namespace multiscale
