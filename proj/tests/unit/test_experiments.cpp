#include <gtest/gtest.h>

#include "multiscale/experiments.hpp"
#include "test_models.hpp"

using namespace multiscale;
using namespace test_models;

namespace {

ExperimentConfig small_config(unsigned workers) {
    ExperimentConfig c;
    c.model = linear_model(4, 0.1, true, true);
    c.model.v0 = ModalField(std::vector<double>{1.5, 0, 0, 0});
    c.model.h_macro = 2e-3;
    c.epsilon_grid = {0.1, 0.05};
    c.ensemble_size = 12;
    c.test_functions = {{ModalField::unit(4, 1), 0}};
    c.observables = {{"coordinate", 1}, {"norm_squared", 1}};
    c.averaging.t_avg = 1.0;
    c.averaging.n_replicas = 2;
    c.audit_samples = 6;
    c.vbar_trajectories = 3;
    c.vbar_times = 2;
    c.master_seed = 31;
    c.worker_count = workers;
    c.averaging.workers = workers;
    c.frozen_x = ModalField::unit(4, 1);
    return c;
}

}  // namespace

TEST(Experiments, WorkerCountDoesNotChangeOutputs) {
    const ExperimentConfig one = small_config(1), four = small_config(4);
    EXPECT_EQ(render_csv(to_csv(run_convergence_study(one))), render_csv(to_csv(run_convergence_study(four))));
    EXPECT_EQ(render_csv(to_csv(run_moment_audit(one))), render_csv(to_csv(run_moment_audit(four))));
    EXPECT_EQ(render_csv(run_invariant(one)), render_csv(run_invariant(four)));
    EXPECT_EQ(render_csv(run_average(one)), render_csv(run_average(four)));
    const std::vector<double> thetas{0.1, 0.01};
    EXPECT_EQ(render_csv(to_csv(run_theta_stability(one, thetas))),
              render_csv(to_csv(run_theta_stability(four, thetas))));
}

TEST(Experiments, CensoringIsCounted) {
    ExperimentConfig c = small_config(2);
    c.model.explosion_bound = 1.7;
    const auto runs = run_ensemble(c.ensemble_size, 2, [&](std::size_t r) {
        return simulate_slowfast(c.model, c.master_seed, r, SimulationOptions{});
    });
    const std::size_t censored = count_censored(runs);
    EXPECT_GT(censored, 0u);
    const SimulateOutput out = run_simulate(c, std::nullopt);
    EXPECT_EQ(out.total, c.ensemble_size);
    EXPECT_EQ(out.censored, censored);
}

TEST(Experiments, ThetaStabilityEqualThetaIsZero) {
    ExperimentConfig c = small_config(1);
    c.model = cubic_model(4, 0.1, 0.01);
    const std::vector<double> thetas{0.1, 0.01};
    const ResultTable t = run_theta_stability(c, thetas);
    EXPECT_EQ(t.find("theta_stability", 0.1, "distance_equal_theta").value, 0.0);
}

TEST(Experiments, NoiseFreeAuditIsEpsilonStable) {
    ExperimentConfig c = small_config(1);
    c.model = linear_model(4, 0.1, false, false, 0.0, 0.0, 0.0, 0.0);
    c.model.v0 = ModalField::unit(4, 1);
    c.epsilon_grid = {0.1, 0.02, 0.004};
    const ResultTable t = run_moment_audit(c);
    EXPECT_LE(t.find("moment_audit", std::nullopt, "ratio:V_integral_ratio").value, 1.05);
}

TEST(Experiments, HolderEqualTimesAreZero) {
    ExperimentConfig c = small_config(1);
    const ResultTable t = run_holder_stats(c);
    EXPECT_GE(t.rows().size(), 3u);
    for (const auto& r : t.rows()) EXPECT_GE(r.value, 0.0);
}
