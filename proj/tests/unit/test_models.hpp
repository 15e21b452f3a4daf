#pragma once

// Small models shared by the unit tests.

#include "multiscale/fast_dynamics.hpp"
#include "multiscale/model.hpp"

namespace test_models {

using namespace multiscale;

inline ModelSpec linear_model(std::size_t n, double eps, bool slow_noise, bool fast_noise, double a_c = 1.0,
                              double b_c = 2.0, double b_u = 0.0, double b_v = 1.0) {
    ModelSpec m;
    m.grid = GridSpec{n, 2 * n, 1.0};
    m.op1 = make_dirichlet_operator(n, 0.1, 1.0, slow_noise ? 0.5 : 0.0, 1.0, 0.25);
    m.op2 = make_dirichlet_operator(n, 1.0, 1.0, fast_noise ? 1.0 : 0.0, 1.0, 0.25);
    m.reaction_slow = linear_benchmark_slow(b_u, b_v);
    m.reaction_fast = linear_benchmark_fast(a_c, b_c);
    m.lyapunov = make_lyapunov(m.reaction_slow.growth, 1.0);
    m.epsilon = eps;
    m.horizon = 1.0;
    m.u0 = ModalField::unit(n, 1);
    m.v0 = ModalField(n);
    return m;
}

inline ModelSpec cubic_model(std::size_t n, double eps, double theta) {
    ModelSpec m = linear_model(n, eps, true, true);
    m.reaction_slow = cubic_rough(1.0, 0.5);
    m.reaction_fast = lipschitz_fast(1.0, 0.5, 1.0, 0.5);
    m.lyapunov = make_lyapunov(m.reaction_slow.growth, 1.0);
    m.theta = theta;
    return m;
}

inline FrozenFastConfig frozen(const ModelSpec& m, const ModalField& x) {
    FrozenFastConfig c;
    c.x = x;
    c.op2 = m.op2;
    c.reaction_fast = m.reaction_fast;
    c.grid = m.grid;
    return c;
}

}  // namespace test_models
