#pragma once

// Sine eigenbasis of the Dirichlet Laplacian on (0, ℓ): modal fields,
// diagonal operators, and the collocation transform between modal
// coefficients and point values.

#include <cstddef>
#include <span>
#include <vector>

namespace multiscale {

/// Coefficients of a field in the sine eigenbasis, mode k stored at index k-1.
class ModalField {
public:
    ModalField() = default;
    explicit ModalField(std::size_t n_modes) : coeffs_(n_modes, 0.0) {}
    /// Throws invalid_parameter if any coefficient is NaN or infinite.
    explicit ModalField(std::vector<double> coeffs);

    /// Unit vector e_k (1-based mode index).
    static ModalField unit(std::size_t n_modes, std::size_t k);

    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::span<double> coeffs() noexcept { return coeffs_; }
    const std::vector<double>& vector() const noexcept { return coeffs_; }

    double norm() const noexcept;
    double norm_squared() const noexcept;
    bool is_finite() const noexcept;

    ModalField& operator+=(const ModalField& other);
    ModalField& operator-=(const ModalField& other);
    ModalField& operator*=(double s) noexcept;

    friend bool operator==(const ModalField&, const ModalField&) = default;

private:
    std::vector<double> coeffs_;
};

ModalField operator+(ModalField a, const ModalField& b);
ModalField operator-(ModalField a, const ModalField& b);
ModalField operator*(double s, ModalField a);
double dot(const ModalField& a, const ModalField& b);

/// Diagonal generator A e_k = -α_k e_k with diagonal noise Q e_k = λ_k e_k.
struct SpectralOperator {
    std::vector<double> alphas;
    std::vector<double> lambdas;
    double gamma_reg = 0.5;
    // power-law exponents of the families α_k ∝ k^a, λ_k ∝ k^{-s}
    double alpha_exponent = 2.0;
    double lambda_exponent = 0.0;

    std::size_t size() const noexcept { return alphas.size(); }
};

/// Throws config_rejected unless α_1 > 0, α nondecreasing, λ_k ≥ 0 and sizes agree.
void validate_spectrum(const SpectralOperator& op);

struct GridSpec {
    std::size_t n_modes = 0;
    std::size_t n_quad = 0;
    double length = 1.0;

    /// Quadrature weight ℓ/(M+1) of the interior collocation rule.
    double weight() const noexcept { return length / static_cast<double>(n_quad + 1); }
    double node(std::size_t j) const noexcept {
        return static_cast<double>(j + 1) * length / static_cast<double>(n_quad + 1);
    }
};

/// Throws invalid_parameter unless N ≥ 1, ℓ > 0 and M ≥ 2N.
void validate_grid(const GridSpec& grid);

/// α_k = ν (kπ/ℓ)², k = 1..N.
std::vector<double> dirichlet_eigenpairs(std::size_t n_modes, double nu, double length);

/// Power-law noise amplitudes λ_k = λ₀ k^{-s}.
std::vector<double> power_law_amplitudes(std::size_t n_modes, double lambda0, double decay);

/// Dirichlet Laplacian ν∂² on (0, ℓ) with power-law noise.
SpectralOperator make_dirichlet_operator(std::size_t n_modes, double nu, double length, double lambda0,
                                         double decay, double gamma);

/// e^{tA} f, i.e. coefficient k multiplied by e^{-α_k t}.
ModalField semigroup_apply(const SpectralOperator& op, double t, const ModalField& f);

/// ‖(-A)^γ f‖ = sqrt(Σ α_k^{2γ} f_k²).
double fractional_norm(const ModalField& f, const SpectralOperator& op, double gamma);

/// Series test for Σ λ_k² α_k^{2γ-1} with α_k ∝ k^a, λ_k ∝ k^{-s}:
/// true iff a(2γ-1) - 2s < -1.
bool check_noise_regularity(double alphas_exponent, double lambdas_exponent, double gamma);

/// Collocation transform on the nodes ξ_j = jℓ/(M+1), j = 1..M, with basis
/// √(2/ℓ) sin(kπξ/ℓ). `analyze` is the exact discrete inverse of
/// `synthesize` (discrete sine orthogonality) for N ≤ M.
class SineTransform {
public:
    explicit SineTransform(const GridSpec& grid);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t n_modes() const noexcept { return grid_.n_modes; }
    std::size_t n_quad() const noexcept { return grid_.n_quad; }

    std::vector<double> synthesize(const ModalField& f) const;
    ModalField analyze(std::span<const double> values) const;

    void synthesize(std::span<const double> coeffs, std::span<double> values) const;
    void analyze(std::span<const double> values, std::span<double> coeffs) const;

    /// (ℓ/(M+1)) Σ_j |f_j|^p, the quadrature value of ∫|f|^p.
    double integrate_power(std::span<const double> values, double p) const;
    /// ‖f‖_{L^p} by quadrature.
    double lp_norm(std::span<const double> values, double p) const;

private:
    GridSpec grid_;
    std::vector<double> basis_;  // row-major M x N, basis_[j*N + k]
};

std::vector<double> synthesize(const ModalField& f, const GridSpec& grid);
ModalField analyze(std::span<const double> values, const GridSpec& grid);

}  // namespace multiscale
