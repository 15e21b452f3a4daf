#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "multiscale/errors.hpp"
#include "multiscale/spectral.hpp"

using namespace multiscale;
using std::numbers::pi;

TEST(DirichletEigenpairs, AnalyticEigenvalues) {
    EXPECT_NEAR(dirichlet_eigenpairs(1, 1.0, 1.0)[0], pi * pi, 1e-12);
    EXPECT_NEAR(dirichlet_eigenpairs(2, 1.0, 1.0)[1], 4.0 * pi * pi, 1e-12);
    EXPECT_NEAR(dirichlet_eigenpairs(1, 0.5, 1.0)[0], pi * pi / 2.0, 1e-12);
    const auto a = dirichlet_eigenpairs(16, 0.3, 2.0);
    for (std::size_t k = 1; k < a.size(); ++k) EXPECT_GT(a[k], a[k - 1]);
}

TEST(DirichletEigenpairs, RejectsNonPositiveInputs) {
    EXPECT_THROW(dirichlet_eigenpairs(4, 0.0, 1.0), invalid_parameter);
    EXPECT_THROW(dirichlet_eigenpairs(4, 1.0, -1.0), invalid_parameter);
    EXPECT_THROW(dirichlet_eigenpairs(0, 1.0, 1.0), invalid_parameter);
}

TEST(ModalField, RejectsNonFinite) {
    EXPECT_THROW(ModalField(std::vector<double>{1.0, std::nan("")}), invalid_parameter);
    EXPECT_THROW(ModalField(std::vector<double>{INFINITY}), invalid_parameter);
}

TEST(SemigroupApply, IdentityDecayAndMonotone) {
    const auto op = make_dirichlet_operator(4, 1.0, 1.0, 0.0, 0.0, 0.5);
    const ModalField f(std::vector<double>{1.0, -2.0, 0.5, 3.0});
    EXPECT_EQ(semigroup_apply(op, 0.0, f), f);
    EXPECT_NEAR(semigroup_apply(op, 0.1, ModalField::unit(4, 1))[0], 0.37271, 1e-5);
    EXPECT_NEAR(semigroup_apply(op, 0.1, ModalField::unit(4, 1))[0], std::exp(-0.1 * pi * pi), 1e-15);
    double prev = f.norm();
    for (double t : {0.001, 0.01, 0.1, 1.0}) {
        const double n = semigroup_apply(op, t, f).norm();
        EXPECT_LE(n, prev);
        prev = n;
    }
    EXPECT_THROW(semigroup_apply(op, -1.0, f), invalid_parameter);
}

TEST(SemigroupApply, SemigroupProperty) {
    const auto op = make_dirichlet_operator(8, 0.7, 1.3, 0.0, 0.0, 0.5);
    ModalField f(8);
    for (std::size_t k = 0; k < 8; ++k) f[k] = std::sin(1.0 + static_cast<double>(k));
    for (double t : {0.0, 0.01, 0.3})
        for (double s : {0.0, 0.02, 0.5}) {
            const ModalField a = semigroup_apply(op, t + s, f);
            const ModalField b = semigroup_apply(op, t, semigroup_apply(op, s, f));
            for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
        }
}

TEST(SineTransform, Roundtrips) {
    GridSpec g{8, 32, 1.0};
    const SineTransform tr(g);
    const ModalField zero(8);
    for (double v : tr.synthesize(zero)) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(tr.analyze(tr.synthesize(zero)), zero);
    const ModalField e1 = ModalField::unit(8, 1);
    const ModalField r1 = tr.analyze(tr.synthesize(e1));
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(r1[k], e1[k], 1e-12);

    GridSpec g2{2, 64, 1.0};
    const ModalField f(std::vector<double>{1.0, 0.5});
    EXPECT_LE((analyze(synthesize(f, g2), g2) - f).norm(), 1e-12);
}

TEST(SineTransform, BasisValuesAtNodes) {
    GridSpec g{3, 7, 2.0};
    const SineTransform tr(g);
    const auto vals = tr.synthesize(ModalField::unit(3, 2));
    for (std::size_t j = 0; j < 7; ++j) {
        const double xi = static_cast<double>(j + 1) * 2.0 / 8.0;
        EXPECT_NEAR(vals[j], std::sqrt(2.0 / 2.0) * std::sin(2.0 * pi * xi / 2.0), 1e-14);
    }
}

TEST(SineTransform, ParsevalAndSizeChecks) {
    GridSpec g{16, 32, 1.5};
    const SineTransform tr(g);
    ModalField f(16);
    for (std::size_t k = 0; k < 16; ++k) f[k] = 1.0 / (1.0 + static_cast<double>(k * k)) * ((k % 2) ? -1.0 : 1.0);
    const auto vals = tr.synthesize(f);
    const double l2 = std::sqrt(tr.integrate_power(vals, 2.0));
    EXPECT_NEAR(l2, f.norm(), 1e-8 * f.norm());
    EXPECT_NEAR(tr.lp_norm(vals, 2.0), f.norm(), 1e-8 * f.norm());
    EXPECT_THROW(tr.analyze(std::vector<double>(5, 0.0)), invalid_parameter);
    EXPECT_THROW(tr.synthesize(ModalField(3)), invalid_parameter);
    EXPECT_THROW(validate_grid(GridSpec{16, 31, 1.0}), invalid_parameter);
}

TEST(FractionalNorm, Examples) {
    const auto op = make_dirichlet_operator(2, 1.0, 1.0, 0.0, 0.0, 0.5);
    EXPECT_NEAR(fractional_norm(ModalField(std::vector<double>{3.0, 4.0}), op, 0.0), 5.0, 1e-15);
    EXPECT_NEAR(fractional_norm(ModalField::unit(2, 1), op, 0.5), pi, 1e-12);
    const ModalField f(std::vector<double>{0.3, -0.7});
    double prev = 0.0;
    for (double g : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        const double n = fractional_norm(f, op, g);
        EXPECT_GE(n, prev);
        prev = n;
    }
    EXPECT_THROW(fractional_norm(f, op, -0.1), invalid_parameter);
}

TEST(NoiseRegularity, ExponentTest) {
    EXPECT_TRUE(check_noise_regularity(2.0, 1.0, 0.5));
    EXPECT_FALSE(check_noise_regularity(2.0, 1.0, 0.9));
    EXPECT_FALSE(check_noise_regularity(2.0, 0.0, 0.25));
}

TEST(Spectrum, Validation) {
    auto op = make_dirichlet_operator(4, 1.0, 1.0, 1.0, 1.0, 0.25);
    EXPECT_NO_THROW(validate_spectrum(op));
    op.alphas[2] = op.alphas[1] * 0.5;
    EXPECT_THROW(validate_spectrum(op), config_rejected);
}
