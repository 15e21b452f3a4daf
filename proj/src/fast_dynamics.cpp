#include "multiscale/fast_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "multiscale/errors.hpp"
#include "multiscale/stats.hpp"

namespace multiscale {

namespace {

std::size_t steps_for(double duration, double h) {
    return static_cast<std::size_t>(std::llround(duration / h));
}

void check_config(const FrozenFastConfig& cfg) {
    if (!(cfg.h > 0.0)) throw invalid_parameter("FrozenFastConfig: h must be > 0");
    if (!(cfg.t_avg > 0.0)) throw invalid_parameter("FrozenFastConfig: t_avg must be > 0");
    if (cfg.n_replicas < 1) throw invalid_parameter("FrozenFastConfig: n_replicas must be >= 1");
    if (cfg.x.size() != cfg.grid.n_modes || cfg.op2.size() != cfg.grid.n_modes)
        throw invalid_parameter("FrozenFastConfig: size mismatch");
    validate_dissipativity(cfg.op2.alphas.front(), cfg.reaction_fast.L2);
}

ModalField initial_state(const FrozenFastConfig& cfg) {
    if (cfg.v_init) {
        if (cfg.v_init->size() != cfg.grid.n_modes) throw invalid_parameter("FrozenFastConfig: v_init size");
        return *cfg.v_init;
    }
    return ModalField(cfg.grid.n_modes);
}

// Per-replica accumulation: batch means plus pooled moments of component 0.
struct ReplicaSummary {
    std::vector<std::vector<double>> batch_means;  // [batch][component]
    double sum0 = 0.0;
    double sumsq0 = 0.0;
};

}  // namespace

FrozenFastStepper::FrozenFastStepper(const FrozenFastConfig& cfg)
    : reaction_(cfg.reaction_fast), transform_(cfg.grid), plan_(make_plan(cfg.op2, cfg.h, 1.0)) {
    if (cfg.x.size() != cfg.grid.n_modes) throw invalid_parameter("FrozenFastStepper: x size mismatch");
    const std::size_t m = cfg.grid.n_quad;
    const std::size_t n = cfg.grid.n_modes;
    x_phys_ = transform_.synthesize(cfg.x);
    v_phys_.resize(m);
    g_phys_.resize(m);
    forcing_.resize(n);
    scratch_.resize(n);
}

void FrozenFastStepper::step(std::span<double> v, RngStream& stream) {
    transform_.synthesize(v, v_phys_);
    nemytskii_fast(reaction_, 0.0, x_phys_, v_phys_, g_phys_, transform_.grid());
    transform_.analyze(g_phys_, forcing_);
    ou_step_inplace(v, plan_, forcing_, stream, scratch_);
}

ModalField step_frozen_fast(const ModalField& v, const FrozenFastConfig& cfg, RngStream& stream) {
    if (!(cfg.h > 0.0)) throw invalid_parameter("step_frozen_fast: h must be > 0");
    FrozenFastStepper stepper(cfg);
    ModalField out = v;
    stepper.step(out.coeffs(), stream);
    return out;
}

Observable observable_norm_squared() {
    return {1, [](const ModalField& v, std::span<const double>, std::span<double> out) { out[0] = v.norm_squared(); }};
}

Observable observable_coordinate(std::size_t mode) {
    if (mode < 1) throw invalid_parameter("observable_coordinate: modes are 1-based");
    return {1, [mode](const ModalField& v, std::span<const double>, std::span<double> out) {
                if (mode > v.size()) throw invalid_parameter("observable_coordinate: mode out of range");
                out[0] = v[mode - 1];
            }};
}

Observable observable_identity(std::size_t n_modes) {
    return {n_modes, [](const ModalField& v, std::span<const double>, std::span<double> out) {
                std::copy(v.coeffs().begin(), v.coeffs().end(), out.begin());
            }};
}

Observable observable_constant(double value) {
    return {1, [value](const ModalField&, std::span<const double>, std::span<double> out) { out[0] = value; }};
}

InvariantAverageEstimate estimate_invariant_average(const FrozenFastConfig& cfg, const Observable& observable) {
    check_config(cfg);
    if (observable.dimension < 1 || !observable.fn) throw invalid_parameter("estimate_invariant_average: observable");
    const std::size_t n_burn = steps_for(cfg.burn_in(), cfg.h);
    const std::size_t n_avg = steps_for(cfg.t_avg, cfg.h);
    const std::size_t n_batches = cfg.n_batches;
    if (n_batches < 1 || n_avg < n_batches)
        throw invalid_parameter("estimate_invariant_average: t_avg/h must cover every batch");
    const std::size_t batch_len = n_avg / n_batches;
    const std::size_t dim = observable.dimension;

    InvariantAverageEstimate est;
    est.t_burn = cfg.burn_in();
    est.t_avg = cfg.t_avg;
    est.n_replicas = cfg.n_replicas;
    if (est.t_burn < 5.0 / cfg.omega())
        est.warnings.push_back("t_burn below 5/omega; invariant averages may carry start-up bias");

    std::vector<ReplicaSummary> replicas(cfg.n_replicas);
    parallel_for(cfg.n_replicas, cfg.workers, [&](std::size_t r) {
        FrozenFastStepper stepper(cfg);
        RngStream stream = derive_stream(cfg.seed, cfg.stream_offset + r, StreamRole::frozen_fast_noise);
        ModalField v = initial_state(cfg);
        for (std::size_t i = 0; i < n_burn; ++i) stepper.step(v.coeffs(), stream);

        ReplicaSummary& summary = replicas[r];
        summary.batch_means.assign(n_batches, std::vector<double>(dim, 0.0));
        std::vector<double> v_phys(cfg.grid.n_quad);
        std::vector<double> value(dim);
        std::vector<CompensatedSum> acc(dim);
        CompensatedSum s0, sq0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            std::fill(acc.begin(), acc.end(), CompensatedSum{});
            for (std::size_t i = 0; i < batch_len; ++i) {
                stepper.step(v.coeffs(), stream);
                stepper.transform().synthesize(v.coeffs(), v_phys);
                observable.fn(v, v_phys, value);
                for (std::size_t c = 0; c < dim; ++c) acc[c].add(value[c]);
                s0.add(value[0]);
                sq0.add(value[0] * value[0]);
            }
            for (std::size_t c = 0; c < dim; ++c)
                summary.batch_means[b][c] = acc[c].value() / static_cast<double>(batch_len);
        }
        summary.sum0 = s0.value();
        summary.sumsq0 = sq0.value();
    });

    est.mean.assign(dim, 0.0);
    est.std_error.assign(dim, 0.0);
    std::vector<double> column(cfg.n_replicas * n_batches);
    for (std::size_t c = 0; c < dim; ++c) {
        std::size_t idx = 0;
        for (const auto& rep : replicas)
            for (const auto& bm : rep.batch_means) column[idx++] = bm[c];
        const MeanEstimate m = mean_estimate(column);
        est.mean[c] = m.mean;
        est.std_error[c] = m.std_error;
    }

    const double total = static_cast<double>(cfg.n_replicas * n_batches * batch_len);
    CompensatedSum s0, sq0;
    for (const auto& rep : replicas) {
        s0.add(rep.sum0);
        sq0.add(rep.sumsq0);
    }
    const double mean0 = s0.value() / total;
    const double var0 = std::max(0.0, sq0.value() / total - mean0 * mean0);
    est.n_effective = est.std_error[0] > 0.0 ? std::min(total, var0 / (est.std_error[0] * est.std_error[0])) : total;
    return est;
}

std::vector<MomentCheckRow> invariant_moment_check(const FrozenFastConfig& cfg, int p, std::span<const double> scales,
                                                   double c_p) {
    if (p != 2 && p != 4) throw invalid_parameter("invariant_moment_check: p must be 2 or 4");
    if (!(c_p > 0.0)) throw invalid_parameter("invariant_moment_check: c_p must be > 0");
    Observable moment{1, [p](const ModalField& v, std::span<const double>, std::span<double> out) {
                          const double n2 = v.norm_squared();
                          out[0] = p == 2 ? n2 : n2 * n2;
                      }};
    std::vector<MomentCheckRow> rows;
    for (double s : scales) {
        FrozenFastConfig scaled = cfg;
        scaled.x = s * cfg.x;
        const InvariantAverageEstimate est = estimate_invariant_average(scaled, moment);
        MomentCheckRow row;
        row.x_norm = scaled.x.norm();
        row.moment = est.mean[0];
        row.std_error = est.std_error[0];
        row.ratio = row.moment / (c_p * (1.0 + std::pow(row.x_norm, p)));
        rows.push_back(row);
    }
    return rows;
}

ContractionFit contraction_diagnostic(const FrozenFastConfig& cfg, const ModalField& y1, const ModalField& y2,
                                      std::optional<double> horizon) {
    check_config(cfg);
    if (y1.size() != cfg.grid.n_modes || y2.size() != cfg.grid.n_modes)
        throw invalid_parameter("contraction_diagnostic: size mismatch");
    if (y1 == y2) throw undefined_fit("contraction_diagnostic: identical initial data");
    const double t_end = horizon ? *horizon : 5.0 / cfg.omega();
    const std::size_t n = std::max<std::size_t>(steps_for(t_end, cfg.h), 2);

    FrozenFastStepper stepper(cfg);
    const RngStream origin = derive_stream(cfg.seed, cfg.stream_offset, StreamRole::frozen_fast_noise);
    RngStream s1 = origin, s2 = origin;
    ModalField a = y1, b = y2;
    ContractionFit fit;
    fit.times.reserve(n + 1);
    fit.log_distance.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        if (i > 0) {
            stepper.step(a.coeffs(), s1);
            stepper.step(b.coeffs(), s2);
        }
        const double d = (a - b).norm();
        if (!(d > 0.0)) break;  // coalesced to machine precision
        fit.times.push_back(static_cast<double>(i) * cfg.h);
        fit.log_distance.push_back(std::log(d));
    }
    if (fit.times.size() < 2) throw undefined_fit("contraction_diagnostic: trajectories coalesced immediately");
    fit.rate = least_squares_slope(fit.times, fit.log_distance);
    return fit;
}

LipschitzRatio frozen_lipschitz_in_x(const FrozenFastConfig& cfg, const ModalField& x1, const ModalField& x2,
                                     std::optional<double> horizon) {
    check_config(cfg);
    if (x1.size() != cfg.grid.n_modes || x2.size() != cfg.grid.n_modes)
        throw invalid_parameter("frozen_lipschitz_in_x: size mismatch");
    const double dx = (x1 - x2).norm();
    if (!(dx > 0.0)) throw undefined_fit("frozen_lipschitz_in_x: identical slow arguments");
    const double t_end = horizon ? *horizon : cfg.burn_in();
    const std::size_t n = std::max<std::size_t>(steps_for(t_end, cfg.h), 1);

    FrozenFastConfig c1 = cfg, c2 = cfg;
    c1.x = x1;
    c2.x = x2;
    FrozenFastStepper st1(c1), st2(c2);
    const RngStream origin = derive_stream(cfg.seed, cfg.stream_offset, StreamRole::frozen_fast_noise);
    RngStream s1 = origin, s2 = origin;
    ModalField a = initial_state(cfg), b = initial_state(cfg);
    LipschitzRatio out;
    for (std::size_t i = 0; i < n; ++i) {
        st1.step(a.coeffs(), s1);
        st2.step(b.coeffs(), s2);
        const double r = (a - b).norm() / dx;
        out.sup_ratio = std::max(out.sup_ratio, r);
        out.final_ratio = r;
    }
    return out;
}

}  // namespace multiscale
