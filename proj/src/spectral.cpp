#include "multiscale/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "multiscale/errors.hpp"

namespace multiscale {

state_explosion::state_explosion(double t, double norm_u, double norm_v)
    : std::runtime_error("state explosion at t=" + std::to_string(t) + " (|u|=" + std::to_string(norm_u) +
                         ", |v|=" + std::to_string(norm_v) + ")"),
      t_(t),
      norm_u_(norm_u),
      norm_v_(norm_v) {}

ModalField::ModalField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (!is_finite()) throw invalid_parameter("ModalField: non-finite coefficient");
}

ModalField ModalField::unit(std::size_t n_modes, std::size_t k) {
    if (k < 1 || k > n_modes) throw invalid_parameter("ModalField::unit: mode index out of range");
    ModalField f(n_modes);
    f[k - 1] = 1.0;
    return f;
}

double ModalField::norm_squared() const noexcept {
    double s = 0.0;
    for (double c : coeffs_) s += c * c;
    return s;
}

double ModalField::norm() const noexcept { return std::sqrt(norm_squared()); }

bool ModalField::is_finite() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
}

ModalField& ModalField::operator+=(const ModalField& other) {
    if (other.size() != size()) throw invalid_parameter("ModalField: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

ModalField& ModalField::operator-=(const ModalField& other) {
    if (other.size() != size()) throw invalid_parameter("ModalField: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

ModalField& ModalField::operator*=(double s) noexcept {
    for (double& c : coeffs_) c *= s;
    return *this;
}

ModalField operator+(ModalField a, const ModalField& b) { return a += b; }
ModalField operator-(ModalField a, const ModalField& b) { return a -= b; }
ModalField operator*(double s, ModalField a) { return a *= s; }

double dot(const ModalField& a, const ModalField& b) {
    if (a.size() != b.size()) throw invalid_parameter("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void validate_spectrum(const SpectralOperator& op) {
    if (op.alphas.empty()) throw config_rejected(hypothesis::operator_spectrum, "empty spectrum");
    if (op.lambdas.size() != op.alphas.size())
        throw config_rejected(hypothesis::operator_spectrum, "alphas and lambdas differ in length");
    if (!(op.alphas.front() > 0.0)) throw config_rejected(hypothesis::operator_spectrum, "alpha_1 must be > 0");
    for (std::size_t k = 1; k < op.alphas.size(); ++k) {
        if (op.alphas[k] < op.alphas[k - 1])
            throw config_rejected(hypothesis::operator_spectrum, "alphas must be nondecreasing");
    }
    for (double l : op.lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l))
            throw config_rejected(hypothesis::operator_spectrum, "lambdas must be finite and >= 0");
    }
}

void validate_grid(const GridSpec& grid) {
    if (grid.n_modes < 1) throw invalid_parameter("GridSpec: n_modes must be >= 1");
    if (!(grid.length > 0.0)) throw invalid_parameter("GridSpec: length must be > 0");
    if (grid.n_quad < 2 * grid.n_modes) throw invalid_parameter("GridSpec: n_quad must be >= 2*n_modes");
}

std::vector<double> dirichlet_eigenpairs(std::size_t n_modes, double nu, double length) {
    if (n_modes < 1) throw invalid_parameter("dirichlet_eigenpairs: N must be >= 1");
    if (!(nu > 0.0)) throw invalid_parameter("dirichlet_eigenpairs: diffusivity must be > 0");
    if (!(length > 0.0)) throw invalid_parameter("dirichlet_eigenpairs: length must be > 0");
    std::vector<double> alphas(n_modes);
    for (std::size_t k = 1; k <= n_modes; ++k) {
        const double w = static_cast<double>(k) * std::numbers::pi / length;
        alphas[k - 1] = nu * w * w;
    }
    return alphas;
}

std::vector<double> power_law_amplitudes(std::size_t n_modes, double lambda0, double decay) {
    if (!(lambda0 >= 0.0)) throw invalid_parameter("power_law_amplitudes: amplitude must be >= 0");
    if (!(decay >= 0.0)) throw invalid_parameter("power_law_amplitudes: decay exponent must be >= 0");
    std::vector<double> lambdas(n_modes);
    for (std::size_t k = 1; k <= n_modes; ++k)
        lambdas[k - 1] = lambda0 * std::pow(static_cast<double>(k), -decay);
    return lambdas;
}

SpectralOperator make_dirichlet_operator(std::size_t n_modes, double nu, double length, double lambda0,
                                         double decay, double gamma) {
    SpectralOperator op{dirichlet_eigenpairs(n_modes, nu, length), power_law_amplitudes(n_modes, lambda0, decay),
                        gamma, 2.0, decay};
    validate_spectrum(op);
    return op;
}

ModalField semigroup_apply(const SpectralOperator& op, double t, const ModalField& f) {
    if (!(t >= 0.0)) throw invalid_parameter("semigroup_apply: t must be >= 0");
    if (f.size() != op.size()) throw invalid_parameter("semigroup_apply: size mismatch");
    ModalField out = f;
    for (std::size_t k = 0; k < f.size(); ++k) out[k] *= std::exp(-op.alphas[k] * t);
    return out;
}

double fractional_norm(const ModalField& f, const SpectralOperator& op, double gamma) {
    if (!(gamma >= 0.0)) throw invalid_parameter("fractional_norm: gamma must be >= 0");
    if (f.size() != op.size()) throw invalid_parameter("fractional_norm: size mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double w = gamma == 0.0 ? 1.0 : std::pow(op.alphas[k], gamma);
        s += w * w * f[k] * f[k];
    }
    return std::sqrt(s);
}

bool check_noise_regularity(double alphas_exponent, double lambdas_exponent, double gamma) {
    return alphas_exponent * (2.0 * gamma - 1.0) - 2.0 * lambdas_exponent < -1.0;
}

SineTransform::SineTransform(const GridSpec& grid) : grid_(grid) {
    validate_grid(grid);
    const std::size_t n = grid.n_modes;
    const std::size_t m = grid.n_quad;
    const double scale = std::sqrt(2.0 / grid.length);
    const double denom = static_cast<double>(m + 1);
    basis_.resize(m * n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            // reduce (k+1)(j+1) mod 2(M+1) so the sine argument stays in [0, 2π)
            const auto idx = ((k + 1) * (j + 1)) % (2 * (m + 1));
            basis_[j * n + k] = scale * std::sin(std::numbers::pi * static_cast<double>(idx) / denom);
        }
    }
}

void SineTransform::synthesize(std::span<const double> coeffs, std::span<double> values) const {
    const std::size_t n = grid_.n_modes;
    const std::size_t m = grid_.n_quad;
    if (coeffs.size() != n || values.size() != m) throw invalid_parameter("synthesize: size mismatch");
    for (std::size_t j = 0; j < m; ++j) {
        const double* row = &basis_[j * n];
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += row[k] * coeffs[k];
        values[j] = s;
    }
}

void SineTransform::analyze(std::span<const double> values, std::span<double> coeffs) const {
    const std::size_t n = grid_.n_modes;
    const std::size_t m = grid_.n_quad;
    if (coeffs.size() != n || values.size() != m) throw invalid_parameter("analyze: size mismatch");
    std::fill(coeffs.begin(), coeffs.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double* row = &basis_[j * n];
        const double fj = values[j];
        for (std::size_t k = 0; k < n; ++k) coeffs[k] += row[k] * fj;
    }
    const double w = grid_.weight();
    for (double& c : coeffs) c *= w;
}

std::vector<double> SineTransform::synthesize(const ModalField& f) const {
    std::vector<double> values(grid_.n_quad);
    synthesize(f.coeffs(), values);
    return values;
}

ModalField SineTransform::analyze(std::span<const double> values) const {
    ModalField f(grid_.n_modes);
    analyze(values, f.coeffs());
    return f;
}

double SineTransform::integrate_power(std::span<const double> values, double p) const {
    if (values.size() != grid_.n_quad) throw invalid_parameter("integrate_power: size mismatch");
    double s = 0.0;
    if (p == 2.0) {
        for (double v : values) s += v * v;
    } else {
        for (double v : values) s += std::pow(std::abs(v), p);
    }
    return grid_.weight() * s;
}

double SineTransform::lp_norm(std::span<const double> values, double p) const {
    if (!(p > 0.0)) throw invalid_parameter("lp_norm: p must be > 0");
    return std::pow(integrate_power(values, p), 1.0 / p);
}

std::vector<double> synthesize(const ModalField& f, const GridSpec& grid) {
    if (f.size() != grid.n_modes) throw invalid_parameter("synthesize: field/grid mismatch");
    return SineTransform(grid).synthesize(f);
}

ModalField analyze(std::span<const double> values, const GridSpec& grid) {
    if (values.size() != grid.n_quad) throw invalid_parameter("analyze: values/grid mismatch");
    return SineTransform(grid).analyze(values);
}

}  // namespace multiscale
