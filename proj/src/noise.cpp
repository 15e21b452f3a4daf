#include "multiscale/noise.hpp"

#include <cmath>
#include <numbers>

#include "multiscale/errors.hpp"

namespace multiscale {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in [0, 1) from two words.
inline double to_unit(std::uint32_t a, std::uint32_t b) noexcept {
    const std::uint64_t hi = a >> 5;  // 27 bits
    const std::uint64_t lo = b >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += philox_w0;
            key[1] += philox_w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, ctr[0], hi0, lo0);
        mulhilo(philox_m1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

const char* to_string(StreamRole role) noexcept {
    switch (role) {
        case StreamRole::slow_noise: return "slow_noise";
        case StreamRole::fast_noise: return "fast_noise";
        case StreamRole::frozen_fast_noise: return "frozen_fast_noise";
        case StreamRole::auxiliary: return "auxiliary";
    }
    return "unknown";
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trajectory_id, StreamRole role) {
    return RngStream{master_seed, trajectory_id, role, 0};
}

// Key from the seed and the high half of the trajectory id; the low half and
// the role live in the counter words, so distinct (trajectory, role, step,
// pair) tuples below 2^32 trajectories map to distinct Philox inputs.
PhiloxKey RngStream::key() const noexcept {
    const std::uint64_t k = mix64(master_seed ^ mix64(trajectory_id >> 32));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void RngStream::normals_at(std::uint64_t step, std::span<double> out) const {
    if (out.size() >= (1u << 24) * 2) throw invalid_parameter("RngStream: too many draws per step");
    const PhiloxKey k = key();
    const auto role_bits = static_cast<std::uint32_t>(role_tag) << 24;
    const auto traj_lo = static_cast<std::uint32_t>(trajectory_id);
    const std::size_t pairs = (out.size() + 1) / 2;
    for (std::size_t p = 0; p < pairs; ++p) {
        const PhiloxCounter c{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                              role_bits | static_cast<std::uint32_t>(p), traj_lo};
        const PhiloxCounter r = philox4x32_10(c, k);
        const double u1 = 1.0 - to_unit(r[0], r[1]);  // (0, 1]
        const double u2 = to_unit(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[2 * p] = radius * std::cos(angle);
        if (2 * p + 1 < out.size()) out[2 * p + 1] = radius * std::sin(angle);
    }
}

void RngStream::fill_normals(std::span<double> out) {
    normals_at(counter, out);
    ++counter;
}

double RngStream::normal() {
    double z = 0.0;
    fill_normals(std::span<double>(&z, 1));
    return z;
}

double RngStream::uniform() {
    const PhiloxCounter c{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                          (static_cast<std::uint32_t>(role_tag) << 24) | 0x00FFFFFFu,
                          static_cast<std::uint32_t>(trajectory_id)};
    ++counter;
    const PhiloxCounter r = philox4x32_10(c, key());
    return to_unit(r[0], r[1]);
}

ModalField wiener_increment(const SpectralOperator& op, double h, RngStream& stream) {
    if (!(h > 0.0)) throw invalid_parameter("wiener_increment: h must be > 0");
    ModalField dw(op.size());
    stream.fill_normals(dw.coeffs());
    const double sh = std::sqrt(h);
    for (std::size_t k = 0; k < dw.size(); ++k) dw[k] *= op.lambdas[k] * sh;
    return dw;
}

OUStepPlan make_plan(const SpectralOperator& op, double h, double eps_eff) {
    if (!(h > 0.0)) throw invalid_parameter("make_plan: h must be > 0");
    if (!(eps_eff > 0.0)) throw invalid_parameter("make_plan: eps_eff must be > 0");
    const std::size_t n = op.size();
    OUStepPlan plan;
    plan.h = h;
    plan.eps_eff = eps_eff;
    plan.decay.resize(n);
    plan.drift_weight.resize(n);
    plan.noise_std.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = op.alphas[k];
        const double x = a * h / eps_eff;
        // expm1 keeps 1 - e^{-x} accurate for small x
        const double one_minus = -std::expm1(-x);
        const double one_minus_2 = -std::expm1(-2.0 * x);
        plan.decay[k] = std::exp(-x);
        plan.drift_weight[k] = one_minus / a;
        const double l = op.lambdas[k];
        plan.noise_std[k] = std::sqrt(l * l * one_minus_2 / (2.0 * a));
    }
    return plan;
}

double stationary_variance(const SpectralOperator& op, std::size_t k) {
    const double l = op.lambdas.at(k);
    return l * l / (2.0 * op.alphas.at(k));
}

void ou_step_inplace(std::span<double> z, const OUStepPlan& plan, std::span<const double> forcing, RngStream& stream,
                     std::span<double> scratch) {
    const std::size_t n = plan.size();
    if (z.size() != n || forcing.size() != n || scratch.size() != n)
        throw invalid_parameter("ou_step: dimension mismatch");
    stream.fill_normals(scratch);
    for (std::size_t k = 0; k < n; ++k)
        z[k] = plan.decay[k] * z[k] + plan.drift_weight[k] * forcing[k] + plan.noise_std[k] * scratch[k];
}

ModalField ou_step(const ModalField& z, const OUStepPlan& plan, const ModalField& forcing, RngStream& stream) {
    if (z.size() != plan.size() || forcing.size() != plan.size())
        throw invalid_parameter("ou_step: dimension mismatch");
    ModalField out = z;
    std::vector<double> scratch(plan.size());
    ou_step_inplace(out.coeffs(), plan, forcing.coeffs(), stream, scratch);
    return out;
}

}  // namespace multiscale
