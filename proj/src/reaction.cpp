#include "multiscale/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multiscale/errors.hpp"

namespace multiscale {

namespace {

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

inline double eval_polynomial(const std::vector<PolynomialTerm>& terms, double sigma, double lambda_val) {
    double s = 0.0;
    for (const auto& term : terms) {
        double lam = 1.0;
        if (term.lambda_pow > 0) {
            lam = term.lambda_signed ? lambda_val * ipow(std::abs(lambda_val), term.lambda_pow - 1)
                                     : ipow(lambda_val, term.lambda_pow);
        }
        s += term.coef * ipow(sigma, term.sigma_pow) * lam;
    }
    return s;
}

// Point value of b without kind checks.
inline double slow_value(const ReactionSpec& spec, double sigma, double lambda_val) {
    if (spec.kind == ReactionKind::linear_benchmark) return spec.b_u * sigma + spec.b_v * lambda_val;
    return eval_polynomial(spec.terms, sigma, lambda_val);
}

inline double fast_value(const ReactionSpec& spec, double rho, double sigma) {
    if (spec.kind == ReactionKind::linear_benchmark) return spec.a_c * rho - spec.b_c * sigma;
    double g = spec.a_c * rho - spec.b_c * sigma;
    if (spec.a_t != 0.0) g += spec.a_t * std::tanh(rho);
    if (spec.s_c != 0.0) g += spec.s_c * std::sin(sigma);
    return g;
}

inline double truncated(double b, double theta) { return b / (1.0 + theta * std::abs(b)); }

}  // namespace

const char* to_string(ReactionKind kind) noexcept {
    switch (kind) {
        case ReactionKind::polynomial_slow: return "polynomial_slow";
        case ReactionKind::lipschitz_fast: return "lipschitz_fast";
        case ReactionKind::linear_benchmark: return "linear_benchmark";
    }
    return "unknown";
}

ReactionKind reaction_kind_from_string(const std::string& name) {
    if (name == "polynomial_slow") return ReactionKind::polynomial_slow;
    if (name == "lipschitz_fast") return ReactionKind::lipschitz_fast;
    if (name == "linear_benchmark") return ReactionKind::linear_benchmark;
    throw invalid_parameter("unknown reaction kind '" + name + "'");
}

ReactionSpec linear_benchmark_slow(double b_u, double b_v) {
    ReactionSpec spec;
    spec.kind = ReactionKind::linear_benchmark;
    spec.b_u = b_u;
    spec.b_v = b_v;
    // |b_u σ + b_v λ| ≤ max(|b_u|,|b_v|)(|σ| + |λ|);  b_u(σ+ρ)σ + b_v λσ ≤ (1.5|b_u| + |b_v|/2)σ² + |b_v|λ²/2 + |b_u|ρ²/2
    spec.growth = GrowthConstants{1.0, 1.0, 2.0, 2.0, std::max({std::abs(b_u), std::abs(b_v), 1.0}),
                                  std::max(1.0, 1.5 * std::abs(b_u) + 0.5 * std::abs(b_v)), 0.0, 0.0};
    if (b_u == 0.0) spec.growth.kappa2 = 0.0;
    return spec;
}

ReactionSpec linear_benchmark_fast(double a_c, double b_c) {
    ReactionSpec spec;
    spec.kind = ReactionKind::linear_benchmark;
    spec.b_v = 0.0;
    spec.a_c = a_c;
    spec.b_c = b_c;
    spec.L2 = std::abs(b_c);
    return spec;
}

ReactionSpec lipschitz_fast(double a_c, double a_t, double b_c, double s_c) {
    ReactionSpec spec;
    spec.kind = ReactionKind::lipschitz_fast;
    spec.b_v = 0.0;
    spec.a_c = a_c;
    spec.a_t = a_t;
    spec.b_c = b_c;
    spec.s_c = s_c;
    spec.L2 = std::abs(b_c) + std::abs(s_c);
    return spec;
}

ReactionSpec cubic_rough(double c_u, double c_v) {
    ReactionSpec spec;
    spec.kind = ReactionKind::polynomial_slow;
    spec.preset = "cubic_rough";
    spec.b_v = 0.0;
    spec.c_u = c_u;
    spec.c_v = c_v;
    spec.terms = {{-1.0, 3, 0, false}, {c_u, 1, 0, false}, {c_v, 0, 2, true}};
    const double cu = std::abs(c_u);
    const double cv = std::abs(c_v);
    spec.growth = GrowthConstants{3.0, 2.0, 4.0, 4.0, std::max({1.0 + cu, cv, 1.0}), 1.0 + 1.5 * cu + 0.5 * cv,
                                  1.0, 1.0};
    return spec;
}

ReactionSpec polynomial_slow(std::vector<PolynomialTerm> terms, GrowthConstants growth) {
    for (const auto& t : terms) {
        if (t.sigma_pow < 0 || t.lambda_pow < 0)
            throw invalid_parameter("polynomial_slow: exponents must be nonnegative");
    }
    ReactionSpec spec;
    spec.kind = ReactionKind::polynomial_slow;
    spec.b_v = 0.0;
    spec.terms = std::move(terms);
    spec.growth = growth;
    return spec;
}

double eval_b(const ReactionSpec& spec, double /*t*/, double /*xi*/, double sigma, double lambda_val) {
    if (!spec.is_slow_kind()) throw invalid_parameter("eval_b: reaction kind is not a slow kind");
    return slow_value(spec, sigma, lambda_val);
}

double eval_g(const ReactionSpec& spec, double /*t*/, double /*xi*/, double rho, double sigma) {
    if (!spec.is_fast_kind()) throw invalid_parameter("eval_g: reaction kind is not a fast kind");
    return fast_value(spec, rho, sigma);
}

double truncate_value(double b, double theta) {
    if (!(theta > 0.0)) throw invalid_parameter("truncate_b: theta must be > 0");
    return truncated(b, theta);
}

double truncate_b(const ReactionSpec& spec, double theta, double t, double xi, double sigma, double lambda_val) {
    return truncate_value(eval_b(spec, t, xi, sigma, lambda_val), theta);
}

double fast_lipschitz_constant(const ReactionSpec& spec) {
    if (spec.kind == ReactionKind::linear_benchmark) return std::abs(spec.b_c);
    return std::abs(spec.b_c) + std::abs(spec.s_c);
}

void nemytskii_slow(const ReactionSpec& spec, double theta, double /*t*/, std::span<const double> u_phys,
                    std::span<const double> v_phys, std::span<double> out, const GridSpec& grid) {
    if (u_phys.size() != grid.n_quad || v_phys.size() != grid.n_quad || out.size() != grid.n_quad)
        throw invalid_parameter("nemytskii_drift: grid mismatch");
    if (!spec.is_slow_kind()) throw invalid_parameter("nemytskii_drift: reaction kind is not a slow kind");
    const std::size_t m = grid.n_quad;
    if (theta > 0.0) {
        for (std::size_t j = 0; j < m; ++j) out[j] = truncated(slow_value(spec, u_phys[j], v_phys[j]), theta);
    } else {
        for (std::size_t j = 0; j < m; ++j) out[j] = slow_value(spec, u_phys[j], v_phys[j]);
    }
}

void nemytskii_fast(const ReactionSpec& spec, double /*t*/, std::span<const double> u_phys,
                    std::span<const double> v_phys, std::span<double> out, const GridSpec& grid) {
    if (u_phys.size() != grid.n_quad || v_phys.size() != grid.n_quad || out.size() != grid.n_quad)
        throw invalid_parameter("nemytskii_fast: grid mismatch");
    if (!spec.is_fast_kind()) throw invalid_parameter("nemytskii_fast: reaction kind is not a fast kind");
    for (std::size_t j = 0; j < grid.n_quad; ++j) out[j] = fast_value(spec, u_phys[j], v_phys[j]);
}

std::vector<double> nemytskii_drift(const ReactionSpec& spec, std::optional<double> theta, double t,
                                    std::span<const double> u_phys, std::span<const double> v_phys,
                                    const GridSpec& grid) {
    if (theta && !(*theta > 0.0)) throw invalid_parameter("nemytskii_drift: theta must be > 0 when given");
    std::vector<double> out(grid.n_quad);
    nemytskii_slow(spec, theta.value_or(0.0), t, u_phys, v_phys, out, grid);
    return out;
}

double LyapunovSpec::q_bar() const noexcept { return std::max(2.0 * kappa1 * m1, 4.0 * m2); }

LyapunovSpec make_lyapunov(const GrowthConstants& growth, double c_V) {
    if (!(c_V > 0.0)) throw invalid_parameter("make_lyapunov: c_V must be > 0");
    return LyapunovSpec{c_V, growth.m1, growth.m2, growth.kappa1, growth.kappa2};
}

double eval_V(std::span<const double> u_phys, std::span<const double> v_phys, const LyapunovSpec& lyap,
              const SineTransform& transform) {
    // ‖f‖_{L^{2q}}^{q} = (∫|f|^{2q})^{1/2}
    auto term = [&](std::span<const double> f, double q) {
        if (q == 0.0) return 0.0;
        return std::sqrt(transform.integrate_power(f, 2.0 * q));
    };
    const double value =
        1.0 + term(u_phys, 2.0 * lyap.m1) + term(v_phys, 2.0 * lyap.m2) + term(v_phys, lyap.kappa1 * lyap.m1);
    return lyap.c_V * value;
}

double eval_V(std::span<const double> u_phys, std::span<const double> v_phys, const LyapunovSpec& lyap,
              const GridSpec& grid) {
    return eval_V(u_phys, v_phys, lyap, SineTransform(grid));
}

TruncationGap truncation_gap_bound(const ReactionSpec& spec, double theta, std::span<const ReactionSample> samples,
                                   const LyapunovSpec& lyap) {
    if (!(theta >= 0.0)) throw invalid_parameter("truncation_gap_bound: theta must be >= 0");
    TruncationGap gap;
    if (theta == 0.0) return gap;
    for (const auto& s : samples) {
        const double b = eval_b(spec, s.t, s.xi, s.sigma, s.lambda_val);
        const double diff = std::abs(b - truncated(b, theta));
        const double w = lyap.c_V * (1.0 + std::pow(std::abs(s.sigma), 2.0 * lyap.m1) +
                                     std::pow(std::abs(s.lambda_val), 2.0 * lyap.m2));
        gap.max_gap = std::max(gap.max_gap, diff);
        gap.max_ratio = std::max(gap.max_ratio, diff / (theta * w));
    }
    return gap;
}

double validate_dissipativity(double alpha21, double L2) {
    const double omega = alpha21 - L2;
    if (!(omega > 0.0))
        throw config_rejected(hypothesis::dissipativity, "alpha_{2,1} = " + std::to_string(alpha21) +
                                                             ", L2 = " + std::to_string(L2) +
                                                             " gives omega <= 0");
    return omega;
}

GrowthReport validate_growth(const ReactionSpec& spec, const GrowthBox& box) {
    if (!spec.is_slow_kind()) throw invalid_parameter("validate_growth: reaction kind is not a slow kind");
    if (box.points < 2 || !(box.bound > 0.0)) throw invalid_parameter("validate_growth: degenerate box");
    const auto& g = spec.growth;
    const double inf = std::numeric_limits<double>::infinity();
    auto axis = [&](int i) { return -box.bound + 2.0 * box.bound * i / (box.points - 1); };

    GrowthReport report;
    for (int i = 0; i < box.points; ++i) {
        const double sigma = axis(i);
        for (int l = 0; l < box.points; ++l) {
            const double lam = axis(l);
            const double b = std::abs(eval_b(spec, box.t, box.xi, sigma, lam));
            const double env = g.a1 + std::pow(std::abs(sigma), g.m1) + std::pow(std::abs(lam), g.m2);
            const double r = env > 0.0 ? b / env : (b > 0.0 ? inf : 0.0);
            report.growth_ratio = std::max(report.growth_ratio, r);
            for (int j = 0; j < box.points; ++j) {
                const double rho = axis(j);
                const double lhs = eval_b(spec, box.t, box.xi, sigma + rho, lam) * sigma;
                const double env2 = g.a2 + sigma * sigma + std::pow(std::abs(lam), g.kappa1) +
                                    std::pow(std::abs(rho), g.kappa2);
                const double r2 = env2 > 0.0 ? lhs / env2 : (lhs > 0.0 ? inf : 0.0);
                report.one_sided_ratio = std::max(report.one_sided_ratio, r2);
            }
        }
    }
    constexpr double slack = 1.0 + 1e-12;
    report.growth_pass = report.growth_ratio <= g.c1 * slack;
    report.one_sided_pass = report.one_sided_ratio <= g.c2 * slack;
    return report;
}

void validate_slow_reaction(const ReactionSpec& spec, const GrowthBox& box) {
    if (!spec.is_slow_kind()) throw config_rejected(hypothesis::schema, "slow reaction must be a slow kind");
    const auto& g = spec.growth;
    if (!(g.m1 >= 1.0) || !(g.m2 >= 1.0))
        throw config_rejected(hypothesis::growth_exponents, "m1 and m2 must be >= 1");
    if (!(g.kappa1 <= 2.0 * g.m2))
        throw config_rejected(hypothesis::growth_exponents, "kappa1 = " + std::to_string(g.kappa1) +
                                                                " exceeds 2*m2 = " + std::to_string(2.0 * g.m2));
    if (!(g.kappa1 >= 0.0) || !(g.kappa2 >= 0.0))
        throw config_rejected(hypothesis::growth_exponents, "kappa1 and kappa2 must be >= 0");
    if (!(g.c1 > 0.0) || !(g.c2 > 0.0)) throw config_rejected(hypothesis::growth_exponents, "c1, c2 must be > 0");
    const GrowthReport report = validate_growth(spec, box);
    if (!report.growth_pass)
        throw config_rejected(hypothesis::growth_bound,
                              "sampled ratio " + std::to_string(report.growth_ratio) + " exceeds c1");
    if (!report.one_sided_pass)
        throw config_rejected(hypothesis::one_sided_bound,
                              "sampled ratio " + std::to_string(report.one_sided_ratio) + " exceeds c2");
}

void validate_fast_reaction(const ReactionSpec& spec) {
    if (!spec.is_fast_kind()) throw config_rejected(hypothesis::schema, "fast reaction must be a fast kind");
    const double lip = fast_lipschitz_constant(spec);
    if (!(spec.L2 >= lip) || !std::isfinite(spec.L2))
        throw config_rejected(hypothesis::fast_lipschitz, "declared L2 = " + std::to_string(spec.L2) +
                                                              " is below the Lipschitz constant " +
                                                              std::to_string(lip));
}

}  // namespace multiscale
