#include "multiscale/slowfast.hpp"

#include <algorithm>
#include <cmath>

#include "multiscale/errors.hpp"

namespace multiscale {

StreamSet make_streams(std::uint64_t master_seed, std::uint64_t trajectory_id) {
    return {derive_stream(master_seed, trajectory_id, StreamRole::slow_noise),
            derive_stream(master_seed, trajectory_id, StreamRole::fast_noise)};
}

namespace {

std::size_t substeps_for(const ModelSpec& model, double h_macro) {
    ModelSpec probe;
    probe.h_macro = h_macro;
    probe.substep_ratio = model.substep_ratio;
    probe.epsilon = model.epsilon;
    return fast_substeps(probe);
}

}  // namespace

CoupledStepper::CoupledStepper(const ModelSpec& model, double h_macro)
    : model_(model), h_(h_macro), n_sub_(0), transform_(model.grid) {
    if (!(h_macro > 0.0)) throw invalid_parameter("CoupledStepper: h_macro must be > 0");
    n_sub_ = substeps_for(model, h_macro);
    slow_plan_ = make_plan(model.op1, h_macro, 1.0);
    fast_plan_ = make_plan(model.op2, h_macro / static_cast<double>(n_sub_), model.epsilon);
    const std::size_t m = model.grid.n_quad, n = model.grid.n_modes;
    u_phys_.resize(m);
    v_phys_.resize(m);
    g_phys_.resize(m);
    b_acc_.resize(m);
    forcing_.resize(n);
    slow_forcing_.resize(n);
    scratch_.resize(n);
}

void CoupledStepper::advance_fast(std::span<double> v, std::span<const double> u_phys, RngStream& fast, double t,
                                  bool accumulate) {
    const GridSpec& grid = transform_.grid();
    if (accumulate) std::fill(b_acc_.begin(), b_acc_.end(), 0.0);
    for (std::size_t j = 0; j < n_sub_; ++j) {
        transform_.synthesize(v, v_phys_);
        if (accumulate) {
            nemytskii_slow(model_.reaction_slow, model_.theta, t, u_phys, v_phys_, g_phys_, grid);
            for (std::size_t i = 0; i < b_acc_.size(); ++i) b_acc_[i] += g_phys_[i];
        }
        nemytskii_fast(model_.reaction_fast, t, u_phys, v_phys_, g_phys_, grid);
        transform_.analyze(g_phys_, forcing_);
        ou_step_inplace(v, fast_plan_, forcing_, fast, scratch_);
    }
    if (accumulate) {
        const double inv = 1.0 / static_cast<double>(n_sub_);
        for (double& b : b_acc_) b *= inv;
        transform_.analyze(b_acc_, slow_forcing_);
    }
}

void CoupledStepper::step(SlowFastState& state, StreamSet& streams) {
    transform_.synthesize(state.u.coeffs(), u_phys_);
    advance_fast(state.v.coeffs(), u_phys_, streams.fast, state.t, true);
    ou_step_inplace(state.u.coeffs(), slow_plan_, slow_forcing_, streams.slow, scratch_);
    state.t += h_;
    const double nu = state.u.norm(), nv = state.v.norm();
    if (!state.u.is_finite() || !state.v.is_finite() || !(nu + nv <= model_.explosion_bound))
        throw state_explosion(state.t, nu, nv);
}

SlowFastState step_coupled(const SlowFastState& state, const ModelSpec& model, double h_macro, StreamSet& streams) {
    CoupledStepper stepper(model, h_macro);
    SlowFastState next = state;
    stepper.step(next, streams);
    return next;
}

double TestFunction::weight(double t) const noexcept {
    return time_power == 0 ? 1.0 : std::pow(t, time_power);
}

SlowFastRun simulate_slowfast(const ModelSpec& model, std::uint64_t master_seed, std::uint64_t trajectory_id,
                              const SimulationOptions& options) {
    const double T = model.horizon;
    const double h = model.h_macro;
    CoupledStepper stepper(model, h);
    const auto n_steps = static_cast<std::size_t>(std::llround(T / h));

    std::vector<std::size_t> sample_idx;
    for (double s : options.sample_times) {
        if (!(s >= 0.0) || s > T * (1.0 + 1e-12)) throw invalid_parameter("simulate_slowfast: sample time outside [0, T]");
        const auto idx = static_cast<std::size_t>(std::llround(s / h));
        if (!sample_idx.empty() && idx < sample_idx.back())
            throw invalid_parameter("simulate_slowfast: sample times must be nondecreasing");
        sample_idx.push_back(std::min(idx, n_steps));
    }
    for (const auto& tf : options.test_functions)
        if (tf.xi.size() != model.n_modes()) throw invalid_parameter("simulate_slowfast: test function size");

    SlowFastRun run;
    run.master_seed = master_seed;
    run.trajectory_id = trajectory_id;
    run.h = h;
    run.n_sub = stepper.n_sub();
    run.n_steps = n_steps;
    const std::size_t n_tf = options.test_functions.size();
    run.xi_integral.assign(n_tf, 0.0);
    run.discrepancy_sup.assign(n_tf, 0.0);
    run.discrepancy_final.assign(n_tf, 0.0);
    std::vector<CompensatedSum> xi_acc(n_tf), disc_acc(n_tf);
    CompensatedSum v_acc;

    StreamSet streams = make_streams(master_seed, trajectory_id);
    SlowFastState s{model.u0, model.v0, 0.0};
    const SineTransform& tr = stepper.transform();
    std::vector<double> u_phys(model.grid.n_quad), v_phys(model.grid.n_quad);
    auto eval_V_at = [&](const SlowFastState& st) {
        tr.synthesize(st.u.coeffs(), u_phys);
        tr.synthesize(st.v.coeffs(), v_phys);
        return eval_V(u_phys, v_phys, model.lyapunov, tr);
    };
    if (options.record_V) run.V_initial = eval_V_at(s);

    std::size_t next_sample = 0;
    auto take_samples = [&](std::size_t i) {
        while (next_sample < sample_idx.size() && sample_idx[next_sample] == i) {
            run.samples.push_back(s);
            ++next_sample;
        }
    };
    take_samples(0);
    if (options.store_path) {
        run.path.reserve(n_steps + 1);
        run.path.push_back(s);
    }
    run.sup_v_norm2 = s.v.norm_squared();

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * h;
        s.t = t;
        if (options.record_V) v_acc.add(h * eval_V_at(s));
        ModalField u_prev = options.fbar && n_tf > 0 ? s.u : ModalField();
        stepper.step(s, streams);
        const std::span<const double> f = stepper.last_slow_forcing();
        if (n_tf > 0) {
            ModalField fbar;
            if (options.fbar) fbar = options.fbar(t, u_prev);
            for (std::size_t q = 0; q < n_tf; ++q) {
                const TestFunction& tf = options.test_functions[q];
                const double w = tf.weight(t);
                double pf = 0.0, pd = 0.0;
                for (std::size_t k = 0; k < f.size(); ++k) {
                    pf += f[k] * tf.xi[k];
                    if (options.fbar) pd += (f[k] - fbar[k]) * tf.xi[k];
                }
                xi_acc[q].add(h * w * pf);
                if (options.fbar) {
                    disc_acc[q].add(h * w * pd);
                    run.discrepancy_sup[q] = std::max(run.discrepancy_sup[q], std::abs(disc_acc[q].value()));
                }
            }
        }
        s.t = static_cast<double>(i + 1) * h;
        run.sup_v_norm2 = std::max(run.sup_v_norm2, s.v.norm_squared());
        take_samples(i + 1);
        if (options.store_path) run.path.push_back(s);
    }
    for (std::size_t q = 0; q < n_tf; ++q) {
        run.xi_integral[q] = xi_acc[q].value();
        run.discrepancy_final[q] = disc_acc[q].value();
    }
    run.V_integral = v_acc.value();
    return run;
}

double khasminskii_delta(double epsilon, double lambda_exp, double c_const) {
    if (!(epsilon > 0.0) || epsilon >= 1.0) throw invalid_parameter("khasminskii_delta: epsilon must lie in (0, 1)");
    if (!(c_const > 0.0)) throw invalid_parameter("khasminskii_delta: c_const must be > 0");
    if (lambda_exp < 0.0) throw invalid_parameter("khasminskii_delta: lambda_exp must be >= 0");
    const double factor = lambda_exp == 0.0 ? 1.0 : std::pow(std::abs(std::log(epsilon)), lambda_exp / 2.0);
    return 2.0 / c_const * epsilon * factor;
}

KhasminskiiPlan make_khasminskii_plan(double delta, double T) {
    if (!(delta > 0.0) || !(T > 0.0)) throw invalid_parameter("KhasminskiiPlan: delta and T must be > 0");
    KhasminskiiPlan plan;
    plan.delta = std::min(delta, T);
    plan.blocks = static_cast<std::size_t>(std::ceil(T / plan.delta * (1.0 - 1e-12)));
    return plan;
}

KhasminskiiPlan make_khasminskii_plan(double epsilon, double T, double lambda_exp, double c_const) {
    KhasminskiiPlan plan = make_khasminskii_plan(khasminskii_delta(epsilon, lambda_exp, c_const), T);
    plan.c_const = c_const;
    return plan;
}

AuxiliaryPath build_auxiliary(const SlowFastRun& run, const KhasminskiiPlan& plan, const ModelSpec& model) {
    if (run.path.size() != run.n_steps + 1 || run.n_steps == 0)
        throw invalid_parameter("build_auxiliary: run did not store its macro-grid path");
    if (!(plan.delta > 0.0)) throw invalid_parameter("build_auxiliary: plan delta must be > 0");
    if (std::abs(run.h - model.h_macro) > 1e-15 * model.h_macro)
        throw invalid_parameter("build_auxiliary: run and model macro steps differ");
    CoupledStepper stepper(model, run.h);
    if (stepper.n_sub() != run.n_sub) throw invalid_parameter("build_auxiliary: substep count differs from the run");

    AuxiliaryPath aux;
    aux.block_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(plan.delta / run.h)));
    aux.u_aux.reserve(run.n_steps + 1);
    aux.v_aux.reserve(run.n_steps + 1);

    RngStream fast = derive_stream(run.master_seed, run.trajectory_id, StreamRole::fast_noise);
    std::vector<double> u_phys(model.grid.n_quad);
    ModalField v;
    std::size_t block_start = 0;
    for (std::size_t i = 0; i <= run.n_steps; ++i) {
        // a new block opens every block_steps; the terminal point closes the last one
        if (i % aux.block_steps == 0 && i < run.n_steps) {
            block_start = i;
            stepper.transform().synthesize(run.path[i].u.coeffs(), u_phys);
            v = run.path[i].v;
        }
        aux.u_aux.push_back(run.path[block_start].u);
        aux.v_aux.push_back(v);
        if (i == run.n_steps) break;
        fast.counter = i * run.n_sub;
        stepper.advance_fast(v.coeffs(), u_phys, fast, static_cast<double>(i) * run.h, false);
    }
    return aux;
}

AuxiliaryTrajectoryError auxiliary_trajectory_error(const SlowFastRun& run, const AuxiliaryPath& aux) {
    const std::size_t steps = run.n_steps;
    const std::size_t L = aux.block_steps;
    if (run.path.size() != steps + 1 || aux.v_aux.size() != steps + 1 || aux.u_aux.size() != steps + 1 || L < 1)
        throw invalid_parameter("auxiliary_error_stats: mismatched grids");
    AuxiliaryTrajectoryError err;
    CompensatedSum dev;
    for (std::size_t i = 1; i <= steps; ++i) dev.add(run.h * (aux.v_aux[i] - run.path[i].v).norm_squared());
    err.fast_deviation = dev.value();
    const std::size_t blocks = std::max<std::size_t>(1, (steps + L - 1) / L);
    err.slow_increment.resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t start = b * L, stop = std::min(steps, start + L);
        double worst = 0.0;
        for (std::size_t i = start; i <= stop; ++i)
            worst = std::max(worst, (run.path[i].u - run.path[start].u).norm_squared());
        err.slow_increment[b] = worst;
    }
    return err;
}

AuxiliaryErrorStats auxiliary_error_stats(std::span<const AuxiliaryTrajectoryError> errors) {
    if (errors.size() < 2) throw invalid_parameter("auxiliary_error_stats: need at least two samples");
    const std::size_t blocks = errors[0].slow_increment.size();
    std::vector<double> fast(errors.size());
    std::vector<std::vector<double>> slow(blocks, std::vector<double>(errors.size()));
    for (std::size_t r = 0; r < errors.size(); ++r) {
        if (errors[r].slow_increment.size() != blocks)
            throw invalid_parameter("auxiliary_error_stats: mismatched grids");
        fast[r] = errors[r].fast_deviation;
        for (std::size_t b = 0; b < blocks; ++b) slow[b][r] = errors[r].slow_increment[b];
    }
    AuxiliaryErrorStats stats;
    stats.fast_deviation = mean_estimate(fast);
    stats.slow_increment = mean_estimate(slow.front());
    for (const auto& col : slow) {
        const MeanEstimate m = mean_estimate(col);
        if (m.mean > stats.slow_increment.mean) stats.slow_increment = m;
    }
    return stats;
}

AuxiliaryErrorStats auxiliary_error_stats(std::span<const SlowFastRun> orig, std::span<const AuxiliaryPath> aux,
                                          std::size_t n_samples) {
    if (orig.size() != aux.size()) throw invalid_parameter("auxiliary_error_stats: unmatched ensembles");
    const std::size_t n = std::min(n_samples, orig.size());
    std::vector<AuxiliaryTrajectoryError> errors;
    for (std::size_t r = 0; r < n; ++r) {
        if (orig[r].n_steps != orig[0].n_steps || orig[r].h != orig[0].h)
            throw invalid_parameter("auxiliary_error_stats: mismatched grids");
        errors.push_back(auxiliary_trajectory_error(orig[r], aux[r]));
    }
    return auxiliary_error_stats(errors);
}

double compute_rho0(double s, double t, double beta, double gamma1_star) {
    if (!(s > 0.0)) throw invalid_parameter("compute_rho0: s must be > 0");
    if (t < s) throw invalid_parameter("compute_rho0: t must be >= s");
    if (t == s) return 0.0;
    const double l = std::log(t / s);
    return l * l + std::pow(t - s, beta) + std::pow(t - s, 2.0 * gamma1_star);
}

}  // namespace multiscale
