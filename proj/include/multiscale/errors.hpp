#pragma once

#include <stdexcept>
#include <string>

namespace multiscale {

// Bad argument to an operation (negative time, size mismatch, wrong kind).
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A model or experiment configuration violates one of the structural
// hypotheses. `hypothesis()` is the short name of the violated condition.
class config_rejected : public std::runtime_error {
public:
    config_rejected(std::string hypothesis, const std::string& detail)
        : std::runtime_error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}

    const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

// Trajectory left the explosion guard ‖u‖ + ‖v‖ ≤ bound, or became non-finite.
class state_explosion : public std::runtime_error {
public:
    state_explosion(double t, double norm_u, double norm_v);

    double time() const noexcept { return t_; }
    double norm_u() const noexcept { return norm_u_; }
    double norm_v() const noexcept { return norm_v_; }

private:
    double t_;
    double norm_u_;
    double norm_v_;
};

// A diagnostic fit or ratio has no meaning for the supplied data
// (identical initial conditions, degenerate regression).
class undefined_fit : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Names used in config_rejected::hypothesis().
namespace hypothesis {
inline constexpr const char* dissipativity = "dissipativity gap (omega := alpha_{2,1} - L2 > 0)";
inline constexpr const char* growth_exponents = "slow growth exponents (kappa1 <= 2*m2, m1,m2 >= 1)";
inline constexpr const char* growth_bound = "slow growth bound (|b| <= c1(a1 + |sigma|^m1 + |lambda|^m2))";
inline constexpr const char* one_sided_bound =
    "slow one-sided bound (b(sigma+rho,lambda)*sigma <= c2(a2 + sigma^2 + |lambda|^kappa1 + |rho|^kappa2))";
inline constexpr const char* noise_regularity =
    "noise regularity (sum_k lambda_k^2 alpha_k^(2*gamma-1) < inf)";
inline constexpr const char* fast_lipschitz = "fast Lipschitz bound (|g(rho,s1) - g(rho,s2)| <= L2|s1 - s2|)";
inline constexpr const char* operator_spectrum = "operator spectrum (alpha_1 > 0, alpha_k nondecreasing)";
inline constexpr const char* schema = "schema";
}  // namespace hypothesis

}  // namespace multiscale
