#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "multiscale/averaging.hpp"
#include "multiscale/errors.hpp"
#include "multiscale/stats.hpp"
#include "test_models.hpp"

using namespace multiscale;
using namespace test_models;
using std::numbers::pi;

TEST(AnalyticFbar, ClosedForm) {
    const ModelSpec m = linear_model(8, 0.1, true, true, 1.0, 2.0);
    const ModalField f = analytic_Fbar_linear(m, 0.0, ModalField::unit(8, 1));
    EXPECT_NEAR(f[0], 1.0 / (pi * pi + 2.0), 1e-15);
    EXPECT_NEAR(f[0], 0.0842488, 1e-7);
    for (std::size_t k = 1; k < 8; ++k) EXPECT_EQ(f[k], 0.0);
    EXPECT_EQ(analytic_Fbar_linear(linear_model(8, 0.1, true, true, 0.0, 2.0), 0.0, ModalField::unit(8, 3)),
              ModalField(8));
    ModalField x(8);
    for (std::size_t k = 0; k < 8; ++k) x[k] = std::cos(static_cast<double>(k));
    const ModalField a = analytic_Fbar_linear(m, 0.0, x), b = analytic_Fbar_linear(m, 0.0, 2.0 * x);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(b[k], 2.0 * a[k]);
    EXPECT_THROW(analytic_Fbar_linear(cubic_model(8, 0.1, 0.01), 0.0, x), invalid_parameter);
}

TEST(EstimateFbar, MatchesOracle) {
    const ModelSpec m = linear_model(8, 0.1, true, true, 1.0, 2.0);
    AveragedDriftParams p;
    p.t_avg = 40.0;
    p.n_replicas = 4;
    p.seed = 3;
    const ModalField x(std::vector<double>{1.0, 0.5, -0.3, 0, 0, 0, 0, 0.2});
    const FbarEstimate est = estimate_Fbar(0.0, x, p, m);
    const ModalField exact = analytic_Fbar_linear(m, 0.0, x);
    for (std::size_t k = 0; k < 8; ++k)
        EXPECT_LE(std::abs(est.drift[k] - exact[k]), 3.0 * est.std_error[k] + 1e-12) << k;
    // cache determinism
    EXPECT_EQ(estimate_Fbar(0.0, x, p, m).drift, est.drift);
}

TEST(EstimateFbar, SlowOnlyAndSymmetry) {
    const ModelSpec slow_only = linear_model(4, 0.1, true, true, 1.0, 2.0, -1.0, 0.0);
    AveragedDriftParams p;
    p.t_avg = 2.0;
    p.n_replicas = 2;
    const ModalField x(std::vector<double>{0.4, -0.2, 0.1, 0.0});
    const FbarEstimate e = estimate_Fbar(0.0, x, p, slow_only);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(e.drift[k], -x[k], 1e-12);
        EXPECT_LT(e.std_error[k], 1e-12);
    }
    const ModelSpec centered = linear_model(4, 0.1, true, true, 0.0, 2.0);
    p.t_avg = 20.0;
    const FbarEstimate z = estimate_Fbar(0.0, ModalField(4), p, centered);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(std::abs(z.drift[k]), 3.0 * z.std_error[k]);
}

TEST(EstimateFbar, NormBound) {
    const ModelSpec m = linear_model(4, 0.1, true, true);
    AveragedDriftParams p;
    p.norm_bound = 1.0;
    EXPECT_THROW(estimate_Fbar(0.0, 5.0 * ModalField::unit(4, 1), p, m), state_explosion);
}

TEST(FbarCache, HitsOnQuantizedStates) {
    const ModelSpec m = cubic_model(4, 0.1, 0.01);
    AveragedDriftParams p;
    p.t_avg = 1.0;
    p.n_replicas = 2;
    p.cache_quantum = 1e-3;
    FbarCache cache(m, p);
    const ModalField x(std::vector<double>{0.5, 0.1, 0.0, 0.0});
    const ModalField y(std::vector<double>{0.5 + 1e-5, 0.1, 0.0, 0.0});
    const auto a = cache.get(0.0, x);
    const auto b = cache.get(0.0, y);
    EXPECT_EQ(a.drift, b.drift);
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(quantize_state(y, 0.0), y);
}

TEST(StepAveraged, OneStepExact) {
    const ModelSpec m = linear_model(8, 0.1, false, true, 1.0, 2.0);
    AveragedDriftParams p;
    AveragedDrift drift(m, p);
    ASSERT_TRUE(drift.uses_oracle());
    RngStream s = derive_stream(1, 0, StreamRole::slow_noise);
    const double h = 1e-3;
    const double rate = -m.op1.alphas[0] + 1.0 / (pi * pi + 2.0);
    const AveragedState next = step_averaged({ModalField::unit(8, 1), 0.0}, m, drift, s, h);
    EXPECT_NEAR(next.u[0], std::exp(rate * h), 1e-8);
    EXPECT_DOUBLE_EQ(next.t, h);

    const ModelSpec decoupled = linear_model(4, 0.1, false, true, 0.0, 2.0);
    AveragedDrift none(decoupled, p);
    RngStream s2 = derive_stream(1, 0, StreamRole::slow_noise);
    const AveragedState d = step_averaged({ModalField::unit(4, 2), 0.0}, decoupled, none, s2, 0.01);
    EXPECT_NEAR(d.u[1], std::exp(-decoupled.op1.alphas[1] * 0.01), 1e-15);
}

TEST(StepAveraged, RichardsonOrder) {
    const ModelSpec m = linear_model(4, 0.1, false, true, 1.0, 2.0, -3.0, 1.0);
    AveragedDriftParams p;
    AveragedDrift drift(m, p);
    const auto gap = [&](double h) {
        RngStream s = derive_stream(1, 0, StreamRole::slow_noise);
        const AveragedState start{ModalField::unit(4, 1), 0.0};
        const AveragedState full = step_averaged(start, m, drift, s, h);
        const AveragedState half = step_averaged(step_averaged(start, m, drift, s, h / 2.0), m, drift, s, h / 2.0);
        return std::abs(full.u[0] - half.u[0]);
    };
    const double g1 = gap(0.2), g2 = gap(0.1);
    EXPECT_GT(g1, 0.0);
    EXPECT_LT(g2, 0.3 * g1);
}

TEST(SimulateAveraged, DeterministicSolution) {
    const ModelSpec m = linear_model(8, 0.1, false, true, 1.0, 2.0);
    AveragedDriftParams p;
    RngStream s = derive_stream(1, 0, StreamRole::slow_noise);
    const auto traj = simulate_averaged(m, p, ModalField::unit(8, 1), 1.0, 1e-4, s, 1000);
    const double exact = std::exp((-m.op1.alphas[0] + 1.0 / (pi * pi + 2.0)) * 1.0);
    EXPECT_NEAR(traj.states.back().u[0], exact, 1e-6 * exact);
    EXPECT_NEAR(traj.states.back().t, 1.0, 1e-12);
    RngStream s0 = derive_stream(1, 0, StreamRole::slow_noise);
    const auto zero = simulate_averaged(m, p, ModalField::unit(8, 1), 0.0, 1e-4, s0);
    ASSERT_EQ(zero.states.size(), 1u);
    EXPECT_EQ(zero.states[0].u, ModalField::unit(8, 1));
}

TEST(SimulateAveraged, NoisyMeanMatchesNoiseFree) {
    const ModelSpec quiet = linear_model(4, 0.1, false, true);
    const ModelSpec noisy = linear_model(4, 0.1, true, true);
    AveragedDriftParams p;
    RngStream s = derive_stream(1, 0, StreamRole::slow_noise);
    const double target = simulate_averaged(quiet, p, ModalField::unit(4, 1), 1.0, 1e-2, s).states.back().u[0];
    std::vector<double> ends;
    for (std::uint64_t r = 0; r < 200; ++r) {
        RngStream sr = derive_stream(8, r, StreamRole::slow_noise);
        ends.push_back(simulate_averaged(noisy, p, ModalField::unit(4, 1), 1.0, 1e-2, sr).states.back().u[0]);
    }
    const MeanEstimate e = mean_estimate(ends);
    EXPECT_LT(std::abs(e.mean - target), 3.0 * e.std_error);
}

TEST(EstimateVbar, DegenerateCases) {
    ModelSpec m = linear_model(4, 0.1, true, true);
    m.lyapunov = LyapunovSpec{2.5, 0.0, 0.0, 0.0, 0.0};
    AveragedDriftParams p;
    p.t_avg = 1.0;
    p.n_replicas = 2;
    EXPECT_DOUBLE_EQ(estimate_Vbar(ModalField::unit(4, 1), m, p).value, 2.5);

    ModelSpec quiet = linear_model(4, 0.1, false, false, 0.0, 0.0);
    quiet.lyapunov.c_V = 1.5;
    EXPECT_DOUBLE_EQ(estimate_Vbar(ModalField(4), quiet, p).value, 1.5);
}

TEST(EstimateVbar, GrowthBoundedOverXGrid) {
    const ModelSpec m = linear_model(4, 0.1, true, true);
    AveragedDriftParams p;
    p.t_avg = 4.0;
    p.n_replicas = 2;
    const SineTransform tr(m.grid);
    double worst = 0.0;
    for (double s : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const ModalField x = s * ModalField::unit(4, 1);
        const auto xp = tr.synthesize(x);
        const double bound = 1.0 + tr.integrate_power(xp, 4.0 * m.lyapunov.m1);
        worst = std::max(worst, estimate_Vbar(x, m, p).value / bound);
    }
    EXPECT_LT(worst, 10.0);
}

TEST(ThetaConsistency, CubicModel) {
    const ModelSpec m = cubic_model(4, 0.1, 0.0);
    AveragedDriftParams p;
    p.t_avg = 10.0;
    p.n_replicas = 2;
    p.seed = 4;
    const ModalField x(std::vector<double>{0.8, -0.3, 0.1, 0.0});
    const FbarEstimate raw = estimate_Fbar(0.0, x, p, m);
    const VbarEstimate vbar = estimate_Vbar(x, m, p);
    for (double theta : {0.1, 0.01}) {
        AveragedDriftParams pt = p;
        pt.theta = theta;
        const FbarEstimate tr = estimate_Fbar(0.0, x, pt, m);
        EXPECT_LE((raw.drift - tr.drift).norm_squared(), theta * (vbar.value + 3.0 * vbar.std_error)) << theta;
    }
}
