#include <doctest.h>

#include "fixtures.hpp"

using namespace imsmc;
using namespace fixtures;

TEST_CASE("example plant is already in regular form") {
    const RegularForm rf = to_regular_form(example_plant());
    CHECK(rf.t_c == Matrix::Identity(3, 3));
    CHECK(rf.a == example_a());
    Matrix a11(2, 2);
    a11 << 0.1012, 0.8075, -0.0529, 0.0944;
    Matrix a12(2, 1);
    a12 << 1.7837, -0.0396;
    CHECK(rf.a11 == a11);
    CHECK(rf.a12 == a12);
    CHECK(rf.b1(0, 0) == 0.1);
    CHECK(rf.n1() == 2);
}

TEST_CASE("identity input matrix gives an empty x1 block") {
    Plant p;
    p.a_tilde = Matrix::Identity(2, 2) * 0.5;
    p.b_tilde = Matrix::Identity(2, 2);
    p.d = Matrix::Zero(2, 1);
    p.e = Matrix::Zero(1, 2);
    p.delta = Matrix::Zero(1, 1);
    p.validate();
    const RegularForm rf = to_regular_form(p);
    CHECK(rf.t_c == Matrix::Identity(2, 2));
    CHECK(rf.n1() == 0);
    CHECK(rf.a11.size() == 0);
}

TEST_CASE("dense input matrix: closed-form transform and exact zero block") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Plant p;
        p.a_tilde = random_matrix(4, 4, rng);
        p.b_tilde = random_matrix(4, 2, rng);
        p.d = random_matrix(4, 1, rng);
        p.e = random_matrix(1, 4, rng);
        p.delta = Matrix::Constant(1, 1, 0.3);
        if (!is_controllable(p.a_tilde, p.b_tilde) ||
            std::abs(p.b_tilde.bottomRows(2).determinant()) < 1e-3) {
            continue;
        }
        const RegularForm rf = to_regular_form(p);
        Matrix tc = Matrix::Identity(4, 4);
        tc.topRightCorner(2, 2) = -p.b_tilde.topRows(2) * p.b_tilde.bottomRows(2).inverse();
        CHECK((rf.t_c - tc).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(rf.b.topRows(2).cwiseAbs().maxCoeff() == 0.0);
        CHECK(((rf.t_c * p.b_tilde).topRows(2)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((rf.t_c_inv * rf.t_c - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((rf.a - tc * p.a_tilde * tc.inverse()).cwiseAbs().maxCoeff() <= 1e-12);
        // D̄ΔĒ reassembled from the partitions
        const Matrix da = rf.delta_a(p.delta);
        CHECK((da.topLeftCorner(2, 2) - rf.d_bar1 * p.delta * rf.e_bar1).norm() <= 1e-14);
        CHECK((da.bottomRightCorner(2, 2) - rf.d_bar2 * p.delta * rf.e_bar2).norm() <= 1e-14);
    }
}

TEST_CASE("plant errors") {
    Plant p = example_plant();
    SUBCASE("rank deficient input matrix") {
        p.b_tilde = Matrix::Zero(3, 1);
        CHECK_THROWS_WITH_AS(to_regular_form(p), doctest::Contains("rank deficient"), PlantError);
    }
    SUBCASE("singular lower block") {
        p.b_tilde << 1.0, 0.0, 0.0;
        CHECK_THROWS_WITH_AS(to_regular_form(p), doctest::Contains("plant not partitionable"), PlantError);
    }
    SUBCASE("uncontrollable") {
        p.a_tilde = Matrix::Identity(3, 3);
        CHECK_THROWS_AS(p.validate(), PlantError);
    }
    SUBCASE("bad delta shape") {
        p.delta = Matrix::Zero(2, 2);
        CHECK_THROWS_AS(p.validate(), PlantError);
    }
}

TEST_CASE("in-spec flag") {
    CHECK(example_plant(0.8).in_spec());
    CHECK(example_plant(1.0).in_spec());
    CHECK_FALSE(example_plant(2.0).in_spec());
}

TEST_CASE("step: zero fixed point") {
    const Plant p = example_plant();
    const RegularForm rf = to_regular_form(p);
    CHECK(step(rf, p, Vector::Zero(3), Vector::Zero(1), 3).isZero(0.0));
}

TEST_CASE("step matches dense arithmetic") {
    const Plant p = example_plant(0.8, true);
    const RegularForm rf = to_regular_form(p);
    Matrix a = example_a();
    // Ã + DΔE written out by hand
    const double d[3] = {0.2, 0.1, 0.2};
    const double e[3] = {0.5, 0.2, 0.1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) += d[i] * 0.8 * e[j];
    const Vector x = example_x0();
    Vector expect(3);
    for (int i = 0; i < 3; ++i) expect(i) = a(i, 0) * x(0) + a(i, 1) * x(1) + a(i, 2) * x(2);
    CHECK((step(rf, p, x, Vector::Zero(1), 10) - expect).norm() <= 1e-14);
}

TEST_CASE("disturbance window is closed and enters through T_c") {
    const Plant p = example_plant(0.8, true);
    const RegularForm rf = to_regular_form(p);
    const Vector x = example_x0();
    const Vector u = Vector::Constant(1, 2.0);
    const Vector off = step(rf, p, x, u, 49);
    CHECK((step(rf, p, x, u, 50) - off - rf.t_c * Vector::Unit(3, 2)).norm() <= 1e-15);
    CHECK((step(rf, p, x, u, 95) - off - rf.t_c * Vector::Unit(3, 2)).norm() <= 1e-15);
    CHECK(step(rf, p, x, u, 96) == off);
}

TEST_CASE("disturbance table adds to the window") {
    DisturbanceSchedule s;
    s.window = DisturbanceSchedule::Window{2, 4, Vector::Ones(2)};
    s.table[3] = Vector::Constant(2, 0.5);
    s.table[7] = Vector::Constant(2, -1.0);
    CHECK(s.at(1, 2).isZero(0.0));
    CHECK(s.at(3, 2) == Vector::Constant(2, 1.5));
    CHECK(s.at(7, 2) == Vector::Constant(2, -1.0));
}

TEST_CASE("property: superposition for fixed delta") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        Plant p;
        const Index n = 2 + static_cast<Index>(trial % 4);
        const Index nu = 1 + static_cast<Index>(trial % 2);
        p.a_tilde = random_matrix(n, n, rng);
        p.b_tilde = random_matrix(n, nu, rng);
        p.d = random_matrix(n, 2, rng);
        p.e = random_matrix(2, n, rng);
        p.delta = random_matrix(2, 2, rng);
        RegularForm rf;
        try {
            rf = to_regular_form(p);
        } catch (const PlantError&) {
            continue;
        }
        const Vector x1 = random_vector(n, rng), x2 = random_vector(n, rng);
        const Vector u1 = random_vector(nu, rng), u2 = random_vector(nu, rng);
        const double a = coef(rng), b = coef(rng);
        const Vector lhs = step(rf, p, a * x1 + b * x2, a * u1 + b * u2, trial);
        const Vector rhs = a * step(rf, p, x1, u1, trial) + b * step(rf, p, x2, u2, trial);
        CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm() + std::abs(a) * 10 + std::abs(b) * 10));
        CHECK(rf.b.topRows(rf.n1()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((rf.t_c_inv * rf.t_c - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}
