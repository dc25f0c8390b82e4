#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace imsmc;

TEST_CASE("linear scalar residual") {
    const ResidualFn r = [](const Vector& x) -> Vector { return x.array() - 3.0; };
    const LmResult res = levenberg_marquardt(r, Vector::Zero(1));
    CHECK(res.converged);
    CHECK(res.solution(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(res.residual_norm <= 1e-10);
}

TEST_CASE("circle meets diagonal") {
    const ResidualFn r = [](const Vector& x) {
        Vector out(2);
        out << x(0) * x(0) + x(1) * x(1) - 1.0, x(0) - x(1);
        return out;
    };
    Vector x0(2);
    x0 << 1.0, 0.0;
    const LmResult res = levenberg_marquardt(r, x0);
    CHECK(res.converged);
    CHECK(std::abs(res.solution(0) - std::sqrt(0.5)) <= 1e-9);
    CHECK(std::abs(res.solution(1) - std::sqrt(0.5)) <= 1e-9);
}

TEST_CASE("options validation") {
    LmOptions o;
    CHECK_NOTHROW(o.validate());
    o.lambda_up = 0.5;
    CHECK_THROWS(o.validate());
    o = LmOptions{};
    o.lambda_down = 1.5;
    CHECK_THROWS(o.validate());
    o = LmOptions{};
    o.tol_residual = 0.0;
    CHECK_THROWS(o.validate());
}

TEST_CASE("non-finite residual aborts with a diagnostic") {
    const ResidualFn r = [](const Vector& x) -> Vector {
        Vector out(1);
        out(0) = x(0) > 0.5 ? std::nan("") : x(0) - 1.0;
        return out;
    };
    const LmResult res = levenberg_marquardt(r, Vector::Zero(1));
    CHECK_FALSE(res.converged);
    CHECK_FALSE(res.diagnostic.empty());
    CHECK(std::isfinite(res.residual_norm));
}

TEST_CASE("non-finite start throws") {
    const ResidualFn r = [](const Vector& x) -> Vector { return x; };
    CHECK_THROWS(levenberg_marquardt(r, Vector::Constant(1, std::nan(""))));
}

TEST_CASE("fd jacobian of a linear map") {
    std::mt19937_64 rng(3);
    const Matrix a = fixtures::random_matrix(4, 3, rng, 5.0);
    const ResidualFn r = [&a](const Vector& x) -> Vector { return a * x; };
    const Matrix j = fd_jacobian(r, fixtures::random_vector(3, rng, 10.0));
    CHECK((j - a).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("fd jacobian of a product") {
    const ResidualFn r = [](const Vector& x) -> Vector { return Vector::Constant(1, x(0) * x(1)); };
    Vector x(2);
    x << 2.0, 3.0;
    const Matrix j = fd_jacobian(r, x);
    CHECK(j(0, 0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(j(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fd jacobian stable across step sizes") {
    const ResidualFn r = [](const Vector& x) {
        Vector out(2);
        out << std::sin(x(0)) * x(1), std::exp(0.3 * x(1));
        return out;
    };
    Vector x(2);
    x << 0.7, -1.1;
    const Matrix j1 = fd_jacobian(r, x, 1e-6);
    const Matrix j2 = fd_jacobian(r, x, 1e-5);
    Matrix exact(2, 2);
    exact << std::cos(0.7) * -1.1, std::sin(0.7), 0.0, 0.3 * std::exp(0.3 * -1.1);
    CHECK((j1 - exact).norm() <= 1e-8);
    CHECK((j2 - exact).norm() <= 1e-8);
}

TEST_CASE("fd jacobian rejects non-finite evaluations") {
    const ResidualFn r = [](const Vector& x) -> Vector { return Vector::Constant(1, std::log(x(0))); };
    CHECK_THROWS(fd_jacobian(r, Vector::Zero(1)));
}

TEST_CASE("property: monotone accepted residuals, determinism, scale sanity") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = fixtures::random_matrix(3, 3, rng) + 3.0 * Matrix::Identity(3, 3);
        const Vector t = fixtures::random_vector(3, rng, 2.0);
        const ResidualFn r = [&a, &t](const Vector& x) -> Vector {
            Vector out = a * x - t;
            out += 0.2 * x.array().cube().matrix();
            return out;
        };
        const ResidualFn r10 = [&r](const Vector& x) -> Vector { return 10.0 * r(x); };
        const Vector x0 = fixtures::random_vector(3, rng, 2.0);
        const LmResult a1 = levenberg_marquardt(r, x0);
        const LmResult a2 = levenberg_marquardt(r, x0);
        const LmResult b = levenberg_marquardt(r10, x0);
        for (std::size_t i = 1; i < a1.residual_trace.size(); ++i) {
            CHECK(a1.residual_trace[i] <= a1.residual_trace[i - 1]);
        }
        CHECK(a1.solution == a2.solution);
        CHECK(a1.damping_trace == a2.damping_trace);
        CHECK(a1.residual_trace == a2.residual_trace);
        if (a1.converged && b.converged) {
            CHECK((a1.solution - b.solution).norm() <= 1e-8);
        }
        if (a1.converged) {
            CHECK((a1.residual_norm <= LmOptions{}.tol_residual || a1.iterations > 0));
        }
    }
}
