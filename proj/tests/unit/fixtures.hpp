#pragma once

#include <random>

#include "imsmc/experiment.hpp"

namespace fixtures {

using imsmc::Matrix;
using imsmc::Vector;

inline Matrix example_a() {
    Matrix a(3, 3);
    a << 0.1012, 0.8075, 1.7837,
        -0.0529, 0.0944, -0.0396,
         0.0, 0.1937, 0.5402;
    return a;
}

inline Matrix example_b() {
    Matrix b(3, 1);
    b << 0.0, 0.0, 0.1;
    return b;
}

inline imsmc::Plant example_plant(double delta = 0.8, bool pulse = false) {
    imsmc::Plant p;
    p.a_tilde = example_a();
    p.b_tilde = example_b();
    p.d = Matrix(3, 1);
    p.d << 0.2, 0.1, 0.2;
    p.e = Matrix(1, 3);
    p.e << 0.5, 0.2, 0.1;
    p.delta = Matrix::Constant(1, 1, delta);
    if (pulse) {
        p.disturbance.window = imsmc::DisturbanceSchedule::Window{50, 95, Vector::Unit(3, 2)};
    }
    return p;
}

inline Matrix example_g() {
    Matrix g(1, 2);
    g << 0.0728, 0.4562;
    return g;
}

inline Vector example_x0() {
    Vector x(3);
    x << -1.0, 1.0, -5.0;
    return x;
}

inline imsmc::ExperimentConfig example_config(double delta = 0.8, bool pulse = true,
                                            imsmc::ControllerKind kind = imsmc::ControllerKind::imsmc) {
    imsmc::ExperimentConfig cfg;
    cfg.name = "example";
    cfg.plant = example_plant(delta, pulse);
    cfg.controller = kind;
    cfg.window = 2;
    cfg.mu0_init = 0.1;
    cfg.g = example_g();
    cfg.x0 = example_x0();
    cfg.horizon = 150;
    return cfg;
}

inline Matrix random_matrix(imsmc::Index r, imsmc::Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(r, c);
    for (imsmc::Index j = 0; j < c; ++j)
        for (imsmc::Index i = 0; i < r; ++i) m(i, j) = u(rng);
    return m;
}

inline Vector random_vector(imsmc::Index n, std::mt19937_64& rng, double scale = 1.0) {
    return random_matrix(n, 1, rng, scale);
}

}  // namespace fixtures
