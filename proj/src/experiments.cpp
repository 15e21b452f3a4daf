#include "multiscale/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "multiscale/errors.hpp"
#include "multiscale/fast_dynamics.hpp"
#include "multiscale/stats.hpp"

namespace multiscale {

namespace {

struct FbarHolder {
    ModelSpec model;
    AveragedDrift drift;
    FbarHolder(const ModelSpec& m, const AveragedDriftParams& p) : model(m), drift(model, p) {}
};

std::vector<double> uniform_times(double T, std::size_t count) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i)
        t[i] = count == 1 ? T : T * static_cast<double>(i) / static_cast<double>(count - 1);
    return t;
}

// Mean over the uncensored entries of values[r]; censored runs are skipped.
template <class Get>
MeanEstimate mean_over(const std::vector<std::optional<SlowFastRun>>& runs, Get get) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r)
        if (runs[r]) xs.push_back(get(r, *runs[r]));
    return mean_estimate(xs);
}

ResultRow row(const std::string& exp, std::optional<double> eps, const std::string& stat, const MeanEstimate& m,
              std::size_t censored) {
    return {exp, eps, stat, m.mean, m.std_error, m.n, censored};
}

ResultRow scalar_row(const std::string& exp, std::optional<double> eps, const std::string& stat, double value,
                     std::size_t n = 0, std::size_t censored = 0) {
    return {exp, eps, stat, value, 0.0, n, censored};
}

double max_min_ratio(const std::vector<double>& xs) {
    if (xs.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*lo <= 0.0) return *hi <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return *hi / *lo;
}

double lp_power(const SineTransform& tr, const ModalField& f, double p, std::vector<double>& phys) {
    tr.synthesize(f.coeffs(), phys);
    return tr.integrate_power(phys, p);
}

std::string theta_label(double theta) { return format_double(theta); }

}  // namespace

std::vector<std::optional<SlowFastRun>> run_ensemble(std::size_t n, unsigned workers,
                                                     const std::function<SlowFastRun(std::size_t)>& fn) {
    std::vector<std::optional<SlowFastRun>> runs(n);
    parallel_for(n, workers, [&](std::size_t r) {
        try {
            runs[r] = fn(r);
        } catch (const state_explosion&) {
            runs[r].reset();
        }
    });
    return runs;
}

std::size_t count_censored(const std::vector<std::optional<SlowFastRun>>& runs) {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return !r; }));
}

ModelSpec with_epsilon(const ModelSpec& model, double epsilon) {
    ModelSpec m = model;
    m.epsilon = epsilon;
    return m;
}

ModelSpec with_theta(const ModelSpec& model, double theta) {
    ModelSpec m = model;
    m.theta = theta;
    return m;
}

std::function<ModalField(double, const ModalField&)> make_fbar(const ModelSpec& model,
                                                               const AveragedDriftParams& params) {
    AveragedDriftParams p = params;
    if (p.theta == 0.0) p.theta = model.theta;  // average the drift the coupled run uses
    auto holder = std::make_shared<FbarHolder>(model, p);
    return [holder](double t, const ModalField& x) { return holder->drift(t, x).drift; };
}

ResultTable run_convergence_study(const ExperimentConfig& cfg) {
    const ModelSpec& base = cfg.model;
    const std::size_t n = cfg.ensemble_size;
    const unsigned workers = cfg.worker_count;
    const double T = base.horizon;
    ResultTable table;
    if (cfg.epsilon_grid.empty()) throw invalid_parameter("run_convergence_study: epsilon_grid is empty");

    std::function<ModalField(double, const ModalField&)> fbar;
    if (cfg.discrepancy) fbar = make_fbar(base, cfg.averaging);

    // reference terminal states, sharing each trajectory's slow noise
    std::vector<std::optional<ModalField>> reference(n);
    const bool analytic = base.is_linear_benchmark() && base.theta == 0.0;
    if (analytic) {
        parallel_for(n, workers, [&](std::size_t r) {
            AveragedDrift drift(base, cfg.averaging);
            RngStream slow = derive_stream(cfg.master_seed, r, StreamRole::slow_noise);
            try {
                reference[r] = simulate_averaged(base, drift, base.u0, T, base.h_macro, slow).states.back().u;
            } catch (const state_explosion&) {
                reference[r].reset();
            }
        });
    } else {
        const ModelSpec fine = with_epsilon(base, cfg.epsilon_grid.back() / 5.0);
        SimulationOptions opts;
        opts.sample_times = {T};
        const auto runs = run_ensemble(n, workers, [&](std::size_t r) {
            return simulate_slowfast(fine, cfg.master_seed, r, opts);
        });
        for (std::size_t r = 0; r < n; ++r)
            if (runs[r]) reference[r] = runs[r]->samples.back().u;
        table.add(scalar_row("convergence", fine.epsilon, "reference_epsilon", fine.epsilon, n, count_censored(runs)));
    }

    for (double eps : cfg.epsilon_grid) {
        const ModelSpec model = with_epsilon(base, eps);
        SimulationOptions opts;
        opts.sample_times = {T};
        opts.test_functions = cfg.test_functions;
        opts.fbar = fbar;
        const auto runs = run_ensemble(n, workers, [&](std::size_t r) {
            return simulate_slowfast(model, cfg.master_seed, r, opts);
        });
        std::size_t censored = 0;
        for (std::size_t r = 0; r < n; ++r)
            if (!runs[r] || !reference[r]) ++censored;

        for (const auto& obs : cfg.observables) {
            std::vector<double> diff, coupled, averaged;
            for (std::size_t r = 0; r < n; ++r) {
                if (!runs[r] || !reference[r]) continue;
                const double a = obs.eval(runs[r]->samples.back().u);
                const double b = obs.eval(*reference[r]);
                coupled.push_back(a);
                averaged.push_back(b);
                diff.push_back(a - b);
            }
            MeanEstimate d = mean_estimate(diff);
            table.add({"convergence", eps, "weak_error:" + obs.id(), std::abs(d.mean), d.std_error, d.n, censored});
            table.add(row("convergence", eps, "mean_coupled:" + obs.id(), mean_estimate(coupled), censored));
            table.add(row("convergence", eps, "mean_reference:" + obs.id(), mean_estimate(averaged), censored));
        }
        if (fbar) {
            for (std::size_t q = 0; q < cfg.test_functions.size(); ++q) {
                const MeanEstimate m =
                    mean_over(runs, [q](std::size_t, const SlowFastRun& run) { return run.discrepancy_sup[q]; });
                table.add(row("convergence", eps, "discrepancy:" + std::to_string(q), m, count_censored(runs)));
            }
        }
    }
    return table;
}

ResultTable run_khasminskii_study(const ExperimentConfig& cfg) {
    const ModelSpec& base = cfg.model;
    const std::size_t n = cfg.ensemble_size;
    ResultTable table;
    for (double eps : cfg.epsilon_grid) {
        const ModelSpec model = with_epsilon(base, eps);
        const KhasminskiiPlan plan = make_khasminskii_plan(eps, model.horizon, model.lambda_exp, model.c_const);
        table.add(scalar_row("khasminskii", eps, "delta", plan.delta));
        table.add(scalar_row("khasminskii", eps, "delta_over_epsilon", plan.delta / eps));

        SimulationOptions opts;
        opts.store_path = true;
        std::vector<std::optional<AuxiliaryTrajectoryError>> errors(n);
        parallel_for(n, cfg.worker_count, [&](std::size_t r) {
            try {
                const SlowFastRun run = simulate_slowfast(model, cfg.master_seed, r, opts);
                errors[r] = auxiliary_trajectory_error(run, build_auxiliary(run, plan, model));
            } catch (const state_explosion&) {
                errors[r].reset();
            }
        });
        std::vector<AuxiliaryTrajectoryError> kept;
        for (auto& e : errors)
            if (e) kept.push_back(std::move(*e));
        const std::size_t censored = n - kept.size();
        if (kept.size() < 2) throw invalid_parameter("run_khasminskii_study: fewer than two uncensored runs");
        const AuxiliaryErrorStats stats = auxiliary_error_stats(kept);
        table.add(row("khasminskii", eps, "fast_deviation", stats.fast_deviation, censored));
        table.add(row("khasminskii", eps, "slow_increment", stats.slow_increment, censored));
    }
    return table;
}

ResultTable run_moment_audit(const ExperimentConfig& cfg) {
    const ModelSpec& base = cfg.model;
    const std::size_t n = cfg.ensemble_size;
    const std::size_t K = cfg.audit_samples;
    const double T = base.horizon;
    const std::vector<double> times = uniform_times(T, K);
    const double p_u = 4.0 * base.lyapunov.m1;
    const double p_v = base.lyapunov.q_bar();
    const std::vector<double> eps_grid = cfg.epsilon_grid.empty() ? std::vector<double>{base.epsilon}
                                                                  : cfg.epsilon_grid;

    // V̄ proxy: midpoint rule on J of the audit times for the first few trajectories
    const std::size_t J = std::max<std::size_t>(1, cfg.vbar_times);
    std::vector<std::size_t> vbar_idx(J);
    for (std::size_t j = 0; j < J; ++j)
        vbar_idx[j] = static_cast<std::size_t>(
            std::llround((static_cast<double>(j) + 0.5) * static_cast<double>(K - 1) / static_cast<double>(J)));
    const std::size_t n_vbar = std::min(cfg.vbar_trajectories, n);
    AveragedDriftParams vparams = cfg.averaging;
    vparams.workers = 1;

    ResultTable table;
    std::vector<double> s_vint, s_u, s_v, s_vsup, s_vbar;
    double worst_censored = 0.0;
    for (double eps : eps_grid) {
        const ModelSpec model = with_epsilon(base, eps);
        SimulationOptions opts;
        opts.sample_times = times;
        opts.record_V = true;
        const auto runs = run_ensemble(n, cfg.worker_count, [&](std::size_t r) {
            return simulate_slowfast(model, cfg.master_seed, r, opts);
        });
        const std::size_t censored = count_censored(runs);
        worst_censored = std::max(worst_censored, static_cast<double>(censored) / static_cast<double>(n));

        const MeanEstimate vint = mean_over(runs, [](std::size_t, const SlowFastRun& run) {
            return run.V_integral / run.V_initial;
        });
        const MeanEstimate vsup = mean_over(runs, [](std::size_t, const SlowFastRun& run) { return run.sup_v_norm2; });

        // per-trajectory moments at each sample time, reduced in index order
        const SineTransform tr(model.grid);
        std::vector<std::vector<double>> mu(K), mv(K);
        std::vector<double> phys(model.grid.n_quad);
        for (const auto& run : runs) {
            if (!run) continue;
            for (std::size_t i = 0; i < K; ++i) {
                mu[i].push_back(lp_power(tr, run->samples[i].u, p_u, phys));
                mv[i].push_back(lp_power(tr, run->samples[i].v, p_v, phys));
            }
        }
        MeanEstimate sup_u{}, sup_v{};
        for (std::size_t i = 0; i < K; ++i) {
            const MeanEstimate a = mean_estimate(mu[i]), b = mean_estimate(mv[i]);
            if (a.mean >= sup_u.mean) sup_u = a;
            if (b.mean >= sup_v.mean) sup_v = b;
        }

        std::vector<double> vbar(n_vbar, std::nan(""));
        parallel_for(n_vbar, cfg.worker_count, [&](std::size_t r) {
            if (!runs[r]) return;
            CompensatedSum s;
            for (std::size_t j : vbar_idx) s.add(estimate_Vbar(runs[r]->samples[j].u, model, vparams).value);
            vbar[r] = T * s.value() / static_cast<double>(J);
        });
        std::vector<double> vbar_kept;
        for (double x : vbar)
            if (!std::isnan(x)) vbar_kept.push_back(x);
        const MeanEstimate vbar_m = mean_estimate(vbar_kept);

        table.add(row("moment_audit", eps, "V_integral_ratio", vint, censored));
        table.add(row("moment_audit", eps, "sup_u_moment", sup_u, censored));
        table.add(row("moment_audit", eps, "sup_v_moment", sup_v, censored));
        table.add(row("moment_audit", eps, "sup_v_norm2", vsup, censored));
        table.add(row("moment_audit", eps, "vbar_integral", vbar_m, n_vbar - vbar_m.n));
        s_vint.push_back(vint.mean);
        s_u.push_back(sup_u.mean);
        s_v.push_back(sup_v.mean);
        s_vsup.push_back(vsup.mean);
        s_vbar.push_back(vbar_m.mean);
    }
    table.add(scalar_row("moment_audit", std::nullopt, "ratio:V_integral_ratio", max_min_ratio(s_vint)));
    table.add(scalar_row("moment_audit", std::nullopt, "ratio:sup_u_moment", max_min_ratio(s_u)));
    table.add(scalar_row("moment_audit", std::nullopt, "ratio:sup_v_moment", max_min_ratio(s_v)));
    table.add(scalar_row("moment_audit", std::nullopt, "ratio:sup_v_norm2", max_min_ratio(s_vsup)));
    table.add(scalar_row("moment_audit", std::nullopt, "ratio:vbar_integral", max_min_ratio(s_vbar)));
    table.add(scalar_row("moment_audit", std::nullopt, "max_censored_fraction", worst_censored));
    return table;
}

ResultTable run_holder_stats(const ExperimentConfig& cfg) {
    const ModelSpec& base = cfg.model;
    const std::size_t n = cfg.ensemble_size;
    constexpr std::size_t levels = 4;
    constexpr std::size_t points = std::size_t{1} << levels;
    const double T = base.horizon;
    const std::vector<double> times = uniform_times(T, points + 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t l = 0; l < levels; ++l)
        for (std::size_t i = 1; i + (std::size_t{1} << l) <= points; ++i) pairs.emplace_back(i, i + (std::size_t{1} << l));

    ResultTable table;
    double calibration = 0.0;
    bool calibrated = false;
    for (double eps : cfg.epsilon_grid) {
        const ModelSpec model = with_epsilon(base, eps);
        SimulationOptions opts;
        opts.sample_times = times;
        const auto runs = run_ensemble(n, cfg.worker_count, [&](std::size_t r) {
            return simulate_slowfast(model, cfg.master_seed, r, opts);
        });
        const std::size_t censored = count_censored(runs);
        std::vector<double> ratio(pairs.size());
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const auto [i, j] = pairs[q];
            const MeanEstimate m = mean_over(runs, [i = i, j = j](std::size_t, const SlowFastRun& run) {
                return (run.samples[j].u - run.samples[i].u).norm_squared();
            });
            const double rho = compute_rho0(times[i], times[j], model.holder_beta, model.gamma1_star);
            ratio[q] = m.mean / rho;
            table.add(row("holder", eps,
                          "increment:" + format_double(times[i]) + ":" + format_double(times[j]), m, censored));
        }
        const double worst = *std::max_element(ratio.begin(), ratio.end());
        if (!calibrated) {
            calibration = worst;
            calibrated = true;
            table.add(scalar_row("holder", eps, "calibration", calibration, n - censored, censored));
        }
        table.add(scalar_row("holder", eps, "headroom", calibration > 0.0 ? worst / calibration : 0.0, n - censored,
                             censored));
    }
    return table;
}

ResultTable run_theta_stability(const ExperimentConfig& cfg, std::span<const double> thetas) {
    if (thetas.empty()) throw invalid_parameter("run_theta_stability: empty theta sequence");
    const ModelSpec& base = cfg.model;
    const std::size_t n = cfg.ensemble_size;
    const std::size_t m = thetas.size();
    const double h = base.h_macro;
    const auto n_steps = static_cast<std::size_t>(std::llround(base.horizon / h));

    // slot m repeats θ_0 to witness the exact-zero distance at equal θ
    std::vector<ModelSpec> models;
    for (double th : thetas) models.push_back(with_theta(base, th));
    models.push_back(with_theta(base, thetas[0]));

    struct Lockstep {
        std::vector<double> distance;  // sup_t ‖u^{θ_i} − u^{θ_{i+1}}‖, i < m-1; last entry is the equal-θ pair
        std::vector<double> v_integral;
    };
    std::vector<std::optional<Lockstep>> out(n);
    parallel_for(n, cfg.worker_count, [&](std::size_t r) {
        std::vector<CoupledStepper> steppers;
        steppers.reserve(m + 1);
        for (const auto& md : models) steppers.emplace_back(md, h);
        std::vector<StreamSet> streams(m + 1, make_streams(cfg.master_seed, r));
        std::vector<SlowFastState> states(m + 1, SlowFastState{base.u0, base.v0, 0.0});
        Lockstep ls;
        ls.distance.assign(m, 0.0);
        std::vector<CompensatedSum> vint(m);
        const SineTransform& tr = steppers[0].transform();
        std::vector<double> up(base.grid.n_quad), vp(base.grid.n_quad);
        try {
            for (std::size_t i = 0; i < n_steps; ++i) {
                for (std::size_t k = 0; k < m; ++k) {
                    tr.synthesize(states[k].u.coeffs(), up);
                    tr.synthesize(states[k].v.coeffs(), vp);
                    vint[k].add(h * eval_V(up, vp, base.lyapunov, tr));
                }
                for (std::size_t k = 0; k <= m; ++k) steppers[k].step(states[k], streams[k]);
                for (std::size_t k = 0; k + 1 < m; ++k)
                    ls.distance[k] = std::max(ls.distance[k], (states[k].u - states[k + 1].u).norm());
                ls.distance[m - 1] = std::max(ls.distance[m - 1], (states[0].u - states[m].u).norm());
            }
        } catch (const state_explosion&) {
            out[r].reset();
            return;
        }
        for (std::size_t k = 0; k < m; ++k) ls.v_integral.push_back(vint[k].value());
        out[r] = std::move(ls);
    });

    std::size_t censored = 0;
    for (const auto& o : out)
        if (!o) ++censored;
    auto collect = [&](auto get) {
        std::vector<double> xs;
        for (const auto& o : out)
            if (o) xs.push_back(get(*o));
        return mean_estimate(xs);
    };
    ResultTable table;
    const double eps = base.epsilon;
    for (std::size_t k = 0; k + 1 < m; ++k)
        table.add(row("theta_stability", eps, "distance:" + theta_label(thetas[k]) + "|" + theta_label(thetas[k + 1]),
                      collect([k](const Lockstep& l) { return l.distance[k]; }), censored));
    table.add(row("theta_stability", eps, "distance_equal_theta",
                  collect([m](const Lockstep& l) { return l.distance[m - 1]; }), censored));
    std::vector<double> vmeans;
    for (std::size_t k = 0; k < m; ++k) {
        const MeanEstimate v = collect([k](const Lockstep& l) { return l.v_integral[k]; });
        vmeans.push_back(v.mean);
        table.add(row("theta_stability", eps, "V_integral:" + theta_label(thetas[k]), v, censored));
    }
    table.add(scalar_row("theta_stability", eps, "V_integral_ratio", max_min_ratio(vmeans), n - censored, censored));
    return table;
}

double max_censored_fraction(const ResultTable& table) {
    double worst = 0.0;
    for (const auto& r : table.rows()) {
        const double total = static_cast<double>(r.n + r.censored_count);
        if (r.censored_count > 0 && total > 0.0) worst = std::max(worst, static_cast<double>(r.censored_count) / total);
    }
    return worst;
}

namespace {

FrozenFastConfig frozen_from(const ExperimentConfig& cfg) {
    FrozenFastConfig f;
    f.x = cfg.frozen_x ? *cfg.frozen_x : cfg.model.u0;
    f.op2 = cfg.model.op2;
    f.reaction_fast = cfg.model.reaction_fast;
    f.grid = cfg.model.grid;
    f.h = cfg.averaging.h_fast;
    f.t_burn = cfg.averaging.t_burn;
    f.t_avg = cfg.averaging.t_avg;
    f.n_replicas = cfg.averaging.n_replicas;
    f.n_batches = cfg.averaging.n_batches;
    f.seed = cfg.master_seed;
    f.workers = cfg.worker_count;
    return f;
}

}  // namespace

CsvTable run_invariant(const ExperimentConfig& cfg) {
    const FrozenFastConfig f = frozen_from(cfg);
    CsvTable csv;
    csv.header = {"observable_id", "mean", "std_error", "t_burn", "t_avg", "n_replicas", "seed"};
    for (const auto& obs : cfg.observables) {
        Observable o{1, [obs](const ModalField& v, std::span<const double>, std::span<double> out) {
                         out[0] = obs.eval(v);
                     }};
        const InvariantAverageEstimate est = estimate_invariant_average(f, o);
        csv.rows.push_back({obs.id(), format_double(est.mean[0]), format_double(est.std_error[0]),
                            format_double(est.t_burn), format_double(est.t_avg), std::to_string(est.n_replicas),
                            std::to_string(cfg.master_seed)});
    }
    return csv;
}

CsvTable run_average(const ExperimentConfig& cfg) {
    const ModalField x = cfg.frozen_x ? *cfg.frozen_x : cfg.model.u0;
    AveragedDriftParams p = cfg.averaging;
    if (p.theta == 0.0) p.theta = cfg.model.theta;
    const FbarEstimate est = estimate_Fbar(0.0, x, p, cfg.model);
    const bool linear = cfg.model.is_linear_benchmark();
    const ModalField exact = linear ? analytic_Fbar_linear(cfg.model, 0.0, x) : ModalField();
    CsvTable csv;
    csv.header = {"mode_k", "Fbar_estimate", "std_error", "analytic_value_or_blank"};
    for (std::size_t k = 0; k < x.size(); ++k)
        csv.rows.push_back({std::to_string(k + 1), format_double(est.drift[k]), format_double(est.std_error[k]),
                            linear && p.theta == 0.0 ? format_double(exact[k]) : ""});
    return csv;
}

SimulateOutput run_simulate(const ExperimentConfig& cfg, std::optional<double> epsilon) {
    const ModelSpec model = epsilon ? with_epsilon(cfg.model, *epsilon) : cfg.model;
    validate_model(model);
    const std::size_t n = cfg.ensemble_size;
    const auto n_steps = static_cast<std::size_t>(std::llround(model.horizon / model.h_macro));
    const std::size_t k_dump = std::min(cfg.dump.modes, model.n_modes());
    const std::size_t n_dump = std::min(cfg.dump.trajectories, n);

    std::vector<double> dump_times;
    for (std::size_t i = 0; i <= n_steps; i += cfg.dump.stride)
        dump_times.push_back(static_cast<double>(i) * model.h_macro);
    if (dump_times.back() != static_cast<double>(n_steps) * model.h_macro) dump_times.push_back(model.horizon);

    std::function<ModalField(double, const ModalField&)> fbar;
    if (cfg.discrepancy) fbar = make_fbar(model, cfg.averaging);
    const auto runs = run_ensemble(n, cfg.worker_count, [&](std::size_t r) {
        SimulationOptions opts;
        opts.sample_times = r < n_dump ? dump_times : std::vector<double>{model.horizon};
        opts.test_functions = cfg.test_functions;
        opts.fbar = fbar;
        opts.record_V = true;
        return simulate_slowfast(model, cfg.master_seed, r, opts);
    });

    SimulateOutput out;
    out.total = n;
    out.censored = count_censored(runs);
    for (std::size_t r = 0; r < n_dump; ++r) {
        if (!runs[r]) continue;
        CsvTable t;
        t.header = {"t"};
        for (std::size_t k = 1; k <= k_dump; ++k) t.header.push_back("u_" + std::to_string(k));
        for (std::size_t k = 1; k <= k_dump; ++k) t.header.push_back("v_" + std::to_string(k));
        for (const auto& s : runs[r]->samples) {
            std::vector<std::string> line{format_double(s.t)};
            for (std::size_t k = 0; k < k_dump; ++k) line.push_back(format_double(s.u[k]));
            for (std::size_t k = 0; k < k_dump; ++k) line.push_back(format_double(s.v[k]));
            t.rows.push_back(std::move(line));
        }
        out.trajectories.emplace_back("trajectory_" + std::to_string(r), std::move(t));
    }

    CsvTable& s = out.summary;
    s.header = {"trajectory", "censored", "V_integral", "sup_v_norm2"};
    for (std::size_t q = 0; q < cfg.test_functions.size(); ++q) s.header.push_back("xi_integral_" + std::to_string(q));
    if (fbar)
        for (std::size_t q = 0; q < cfg.test_functions.size(); ++q)
            s.header.push_back("discrepancy_sup_" + std::to_string(q));
    for (const auto& obs : cfg.observables) s.header.push_back("terminal_" + obs.id());
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::string> line{std::to_string(r), runs[r] ? "0" : "1"};
        if (!runs[r]) {
            line.resize(s.header.size());
            s.rows.push_back(std::move(line));
            continue;
        }
        const SlowFastRun& run = *runs[r];
        line.push_back(format_double(run.V_integral));
        line.push_back(format_double(run.sup_v_norm2));
        for (double x : run.xi_integral) line.push_back(format_double(x));
        if (fbar)
            for (double x : run.discrepancy_sup) line.push_back(format_double(x));
        for (const auto& obs : cfg.observables) line.push_back(format_double(obs.eval(run.samples.back().u)));
        s.rows.push_back(std::move(line));
    }
    return out;
}

}  // namespace multiscale
