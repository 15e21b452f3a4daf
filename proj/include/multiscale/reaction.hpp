#pragma once

// Pointwise reaction terms b (slow) and g (fast), their Nemytskii lifts,
// the bounded truncation b_θ = b/(1+θ|b|), the Lyapunov functional V and
// the structural checks run on every model before it is simulated.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multiscale/spectral.hpp"

namespace multiscale {

enum class ReactionKind { polynomial_slow, lipschitz_fast, linear_benchmark };

const char* to_string(ReactionKind kind) noexcept;
ReactionKind reaction_kind_from_string(const std::string& name);

/// coef · σ^sigma_pow · λ^lambda_pow, or coef · σ^sigma_pow · λ|λ|^{lambda_pow-1}
/// when lambda_signed is set.
struct PolynomialTerm {
    double coef = 0.0;
    int sigma_pow = 0;
    int lambda_pow = 0;
    bool lambda_signed = false;

    friend bool operator==(const PolynomialTerm&, const PolynomialTerm&) = default;
};

/// Constants of the growth bound |b| ≤ c1(a1 + |σ|^m1 + |λ|^m2) and the
/// one-sided bound b(σ+ρ,λ)σ ≤ c2(a2 + σ² + |λ|^κ1 + |ρ|^κ2).
struct GrowthConstants {
    double m1 = 1.0;
    double m2 = 1.0;
    double kappa1 = 2.0;
    double kappa2 = 0.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double a1 = 0.0;
    double a2 = 0.0;

    friend bool operator==(const GrowthConstants&, const GrowthConstants&) = default;
};

/// Reaction definition. Which formula applies depends on the kind and on the
/// slot (slow b or fast g) the spec is used in:
///   linear_benchmark, slow:  b(σ,λ) = b_u σ + b_v λ
///   linear_benchmark, fast:  g(ρ,σ) = a_c ρ − b_c σ
///   lipschitz_fast:          g(ρ,σ) = a_c ρ + a_t tanh ρ − b_c σ + s_c sin σ
///   polynomial_slow:         b(σ,λ) = Σ terms
/// The preset "cubic_rough" is the polynomial −σ³ + c_u σ + c_v λ|λ|.
struct ReactionSpec {
    ReactionKind kind = ReactionKind::linear_benchmark;
    std::string preset;
    double b_u = 0.0;
    double b_v = 1.0;
    double a_c = 0.0;
    double a_t = 0.0;
    double b_c = 0.0;
    double s_c = 0.0;
    double c_u = 0.0;
    double c_v = 0.0;
    std::vector<PolynomialTerm> terms;
    GrowthConstants growth;
    double L2 = 0.0;

    bool is_slow_kind() const noexcept { return kind != ReactionKind::lipschitz_fast; }
    bool is_fast_kind() const noexcept { return kind != ReactionKind::polynomial_slow; }
    /// True when g does not depend on ρ (the slow argument).
    bool fast_independent_of_slow() const noexcept { return a_c == 0.0 && a_t == 0.0; }
};

ReactionSpec linear_benchmark_slow(double b_u = 0.0, double b_v = 1.0);
ReactionSpec linear_benchmark_fast(double a_c, double b_c);
ReactionSpec lipschitz_fast(double a_c, double a_t, double b_c, double s_c);
ReactionSpec cubic_rough(double c_u, double c_v);
ReactionSpec polynomial_slow(std::vector<PolynomialTerm> terms, GrowthConstants growth);

/// Slow reaction b(t, ξ, σ, λ). Built-in reactions are autonomous and
/// spatially homogeneous; t and ξ are accepted for the general signature.
double eval_b(const ReactionSpec& spec, double t, double xi, double sigma, double lambda_val);
/// Fast reaction g(t, ξ, ρ, σ) with ρ the slow and σ the fast value.
double eval_g(const ReactionSpec& spec, double t, double xi, double rho, double sigma);

/// b/(1 + θ|b|); throws invalid_parameter for θ ≤ 0.
double truncate_value(double b, double theta);
double truncate_b(const ReactionSpec& spec, double theta, double t, double xi, double sigma, double lambda_val);

/// Lipschitz constant of g in σ implied by the coefficients.
double fast_lipschitz_constant(const ReactionSpec& spec);

/// Pointwise b (or b_θ when theta holds a positive value) at each node.
std::vector<double> nemytskii_drift(const ReactionSpec& spec, std::optional<double> theta, double t,
                                    std::span<const double> u_phys, std::span<const double> v_phys,
                                    const GridSpec& grid);
/// In-place slow lift; theta ≤ 0 means no truncation.
void nemytskii_slow(const ReactionSpec& spec, double theta, double t, std::span<const double> u_phys,
                    std::span<const double> v_phys, std::span<double> out, const GridSpec& grid);
/// In-place fast lift g(t, ξ_j, u_j, v_j).
void nemytskii_fast(const ReactionSpec& spec, double t, std::span<const double> u_phys,
                    std::span<const double> v_phys, std::span<double> out, const GridSpec& grid);

/// V(x,y) = c_V(1 + ‖x‖^{2m1}_{L^{4m1}} + ‖y‖^{2m2}_{L^{4m2}} + ‖y‖^{κ1 m1}_{L^{2κ1 m1}}).
/// A term whose exponent is zero is left out.
struct LyapunovSpec {
    double c_V = 1.0;
    double m1 = 1.0;
    double m2 = 1.0;
    double kappa1 = 2.0;
    double kappa2 = 0.0;

    double p_bar() const noexcept { return 2.0 * kappa2 * m1; }
    double q_bar() const noexcept;
};

LyapunovSpec make_lyapunov(const GrowthConstants& growth, double c_V);

double eval_V(std::span<const double> u_phys, std::span<const double> v_phys, const LyapunovSpec& lyap,
              const SineTransform& transform);
double eval_V(std::span<const double> u_phys, std::span<const double> v_phys, const LyapunovSpec& lyap,
              const GridSpec& grid);

struct ReactionSample {
    double t = 0.0;
    double xi = 0.0;
    double sigma = 0.0;
    double lambda_val = 0.0;
};

struct TruncationGap {
    double max_gap = 0.0;    // max |b − b_θ|
    double max_ratio = 0.0;  // max |b − b_θ| / (θ c_V (1 + |σ|^{2m1} + |λ|^{2m2}))
};

TruncationGap truncation_gap_bound(const ReactionSpec& spec, double theta, std::span<const ReactionSample> samples,
                                   const LyapunovSpec& lyap);

/// ω = α_{2,1} − L2; throws config_rejected (dissipativity) when ω ≤ 0.
double validate_dissipativity(double alpha21, double L2);

/// Lattice used by validate_growth: σ, ρ, λ each on `points` equispaced
/// values in [-bound, bound].
struct GrowthBox {
    double bound = 10.0;
    int points = 41;
    double t = 0.0;
    double xi = 0.5;
};

struct GrowthReport {
    bool growth_pass = false;      // |b| ≤ c1(a1 + |σ|^m1 + |λ|^m2)
    double growth_ratio = 0.0;     // worst |b| / (a1 + |σ|^m1 + |λ|^m2); compare with c1
    bool one_sided_pass = false;   // b(σ+ρ,λ)σ ≤ c2(...)
    double one_sided_ratio = 0.0;  // worst ratio; compare with c2
};

GrowthReport validate_growth(const ReactionSpec& spec, const GrowthBox& box);

/// Structural checks on a slow reaction: exponent constraints and the
/// sampled growth bounds. Throws config_rejected naming the violated one.
void validate_slow_reaction(const ReactionSpec& spec, const GrowthBox& box = {});
/// Declared L2 must dominate the Lipschitz constant of g.
void validate_fast_reaction(const ReactionSpec& spec);

}  // namespace multiscale
