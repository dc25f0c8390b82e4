#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "imsmc/verify.hpp"

using namespace imsmc;
using namespace fixtures;

namespace {

// J written out directly from its definition.
double oracle_j(const CoDesignContext& ctx, const Vector& l, const Matrix& g, double mu0) {
    Matrix gbar(g.rows(), g.cols() + g.rows());
    gbar << g, Matrix::Identity(g.rows(), g.rows());
    const Matrix p = ctx.b * (gbar * ctx.b).inverse();
    const Matrix w = ctx.x_hist - p * gbar * ctx.x_hist;
    Vector c = mu0 * ctx.s + ctx.xi_t * sgn(ctx.s) - ctx.s + ctx.varpi_hat;
    return (w * l - p * c).squaredNorm();
}

CoDesignContext zero_context(const RegularForm& rf, Index window, double xi) {
    HistoryBuffer h(rf.nx(), rf.nu(), window);
    return make_context(rf, h, Vector::Zero(rf.nx()), Vector::Zero(rf.nu()), Vector::Zero(rf.nu()), xi);
}

}  // namespace

TEST_CASE("history push semantics") {
    HistoryBuffer h(3, 1, 2);
    CHECK(h.states().isZero(0.0));
    h.push((Vector(3) << 1, 2, 3).finished(), Vector::Constant(1, 9));
    Matrix expect(3, 2);
    expect << 1, 0, 2, 0, 3, 0;
    CHECK(h.states() == expect);
    h.push((Vector(3) << 4, 5, 6).finished(), Vector::Constant(1, 8));
    expect << 4, 1, 5, 2, 6, 3;
    CHECK(h.states() == expect);
    CHECK(h.inputs() == (Matrix(1, 2) << 8, 9).finished());
    CHECK(h.shifted_states(Vector::Constant(3, 7)).col(1) == expect.col(0));
    CHECK_THROWS(HistoryBuffer(3, 1, 0));
}

TEST_CASE("controller history matches the logged states") {
    const ExperimentConfig cfg = example_config();
    const RegularForm rf = to_regular_form(cfg.plant);
    ImsmcParams p;
    p.g_init = example_g();
    ImsmcController ctrl(rf, p);
    Vector x = cfg.x0;
    std::vector<Vector> xs;
    for (int k = 0; k < 12; ++k) {
        xs.push_back(x);
        const ControlStep st = ctrl.step(x);
        x = step(rf, cfg.plant, x, st.u, k);
        if (k + 1 >= 2) {
            CHECK(ctrl.history().states().col(0) == xs[xs.size() - 1]);
            CHECK(ctrl.history().states().col(1) == xs[xs.size() - 2]);
        }
    }
}

TEST_CASE("objective at the zero context") {
    const RegularForm rf = to_regular_form(example_plant());
    const CoDesignContext ctx = zero_context(rf, 2, 0.01);
    CHECK(objective_j(Vector::Zero(2), example_g(), 0.1, ctx) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(objective_j(Vector::Zero(2), Matrix::Zero(1, 2), 0.7, ctx) == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("stationarity residual vanishes at the zero context") {
    const RegularForm rf = to_regular_form(example_plant());
    const CoDesignContext ctx = zero_context(rf, 2, 0.01);
    CHECK(stationarity_residual(Vector::Zero(ctx.decision_size()), ctx).isZero(0.0));
    CHECK(ctx.decision_size() == 2 + 2 + 1);
}

TEST_CASE("decision packing round trip") {
    std::mt19937_64 rng(2);
    const RegularForm rf = to_regular_form(example_plant());
    const CoDesignContext ctx = random_codesign_context(rf, 3, rng);
    Decision d{random_vector(3, rng), random_matrix(1, 2, rng), 0.4};
    const Decision e = unpack_decision(pack_decision(d), ctx);
    CHECK(e.l == d.l);
    CHECK(e.g == d.g);
    CHECK(e.mu0 == d.mu0);
    CHECK_THROWS(unpack_decision(Vector::Zero(2), ctx));
}

TEST_CASE("property: objective is non-negative and matches an independent evaluator") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> mu(-1.0, 2.0);
    const RegularForm rf = to_regular_form(example_plant());
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 1 + trial % 4;
        const CoDesignContext ctx = random_codesign_context(rf, n, rng);
        const Vector l = random_vector(n, rng, 2.0);
        const Matrix g = random_matrix(1, 2, rng, 2.0);
        const double m = mu(rng);
        const double j = objective_j(l, g, m, ctx);
        CHECK(j >= 0.0);
        CHECK(j == doctest::Approx(oracle_j(ctx, l, g, m)).epsilon(1e-12));
    }
}

TEST_CASE("objective on a mid-trajectory snapshot") {
    const ExperimentConfig cfg = example_config();
    const RegularForm rf = to_regular_form(cfg.plant);
    ImsmcParams p;
    p.g_init = example_g();
    ImsmcController ctrl(rf, p);
    Vector x = cfg.x0;
    for (int k = 0; k < 30; ++k) x = step(rf, cfg.plant, x, ctrl.step(x).u, k);
    const Vector s = augmented_gain(ctrl.current_gain()) * x;
    const CoDesignContext ctx = make_context(rf, ctrl.history(), x, s, Vector::Constant(1, 0.003), 0.01);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const Vector l = random_vector(2, rng);
        const Matrix g = random_matrix(1, 2, rng);
        CHECK(objective_j(l, g, 0.3, ctx) == doctest::Approx(oracle_j(ctx, l, g, 0.3)).epsilon(1e-12));
    }
}

TEST_CASE("Box I blocks against finite differences of J") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> mu(0.05, 0.95);
    const RegularForm rf = to_regular_form(example_plant());
    double worst_l = 0.0, worst_mu = 0.0, worst_g = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const CoDesignContext ctx = random_codesign_context(rf, 2, rng);
        const Vector omega = pack_decision({random_vector(2, rng), random_matrix(1, 2, rng), mu(rng)});
        const ResidualFn jfn = [&ctx](const Vector& w) -> Vector {
            const Decision d = unpack_decision(w, ctx);
            return Vector::Constant(1, objective_j(d.l, d.g, d.mu0, ctx));
        };
        const Vector fd = fd_jacobian(jfn, omega, 1e-5).row(0).transpose();
        const Vector an = stationarity_residual(omega, ctx);
        const auto rel = [](const Vector& a, const Vector& b) {
            return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
        };
        worst_l = std::max(worst_l, rel(an.head(2), fd.head(2)));
        worst_g = std::max(worst_g, rel(an.segment(2, 2), fd.segment(2, 2)));
        worst_mu = std::max(worst_mu, rel(an.tail(1), fd.tail(1)));
    }
    CHECK(worst_l <= 1e-6);
    CHECK(worst_mu <= 1e-6);
    MESSAGE("G block vs finite differences, max relative discrepancy: " << worst_g);
}

TEST_CASE("co-design at the first step") {
    const RegularForm rf = to_regular_form(example_plant());
    HistoryBuffer h(3, 1, 2);
    const Vector x = example_x0();
    const Vector s = augmented_gain(example_g()) * x;
    const CoDesignContext ctx = make_context(rf, h, x, s, Vector::Zero(1), 0.01);
    const CoDesignSolution sol = co_design_solve(ctx, CoDesignOptions{}, example_g(), 0.1);
    CHECK(sol.l.isZero(0.0));
    CHECK(sol.mu0 >= 0.01);
    CHECK(sol.mu0 <= 0.99);
    CHECK((sol.residual_norm < 1e-8 || sol.fallback));
    // With zero history and L = 0 the law is the robust bracket with the new gain.
    const ImsmcOutput out = imsmc_control(ctx, sol);
    const Matrix gbar = augmented_gain(sol.g_next);
    const Vector expect = -(gbar * rf.b).inverse() * (sol.mu0 * s + 0.01 * sgn(s) + gbar * rf.a * x - s);
    CHECK((out.u - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    MESSAGE("first step: G(1) = " << sol.g_next << ", mu0 = " << sol.mu0 << ", clamped = " << sol.clamped);
}

TEST_CASE("zero history and L = 0 reproduce the robust law bit for bit") {
    const RegularForm rf = to_regular_form(example_plant());
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x = random_vector(3, rng, 5.0);
        const Matrix g = random_matrix(1, 2, rng);
        const SurfaceGain sg(g);
        HistoryBuffer h(3, 1, 2);
        auto comp = make_compensator(1, CompensatorMode::one_step, 0.1);
        comp.varpi_hat = random_vector(1, rng, 0.1);
        ReachingParams rp;
        const Vector u_robust = robust_smc_control(rf, sg, x, comp, rp);

        // history with zero columns except x(k) itself, so 𝒳(k)L = 0 for L = 0
        const CoDesignContext ctx = make_context(rf, h, x, sg.sliding(x), comp.varpi_hat, rp.xi_t);
        CoDesignSolution sol;
        sol.l = Vector::Zero(2);
        sol.g_next = g;
        sol.mu0 = rp.mu0;
        const ImsmcOutput out = imsmc_control(ctx, sol);
        CHECK(std::memcmp(out.u.data(), u_robust.data(), sizeof(double)) == 0);
        CHECK(out.residuals.delta_x == x);
    }
}

TEST_CASE("control law against the equivalent expanded form") {
    std::mt19937_64 rng(8);
    const RegularForm rf = to_regular_form(example_plant());
    for (int trial = 0; trial < 100; ++trial) {
        const CoDesignContext ctx = random_codesign_context(rf, 2, rng);
        CoDesignSolution sol;
        sol.l = random_vector(2, rng);
        sol.g_next = random_matrix(1, 2, rng);
        sol.mu0 = 0.37;
        const ImsmcOutput out = imsmc_control(ctx, sol);
        // u = 𝒰L - (ḠB)⁻¹[μ s + ξ sgn s + ḠA(x - 𝒳(k-1)L) - s + ϖ̂ + Ḡ𝒳(k)L]
        Matrix gbar(1, 3);
        gbar << sol.g_next, 1.0;
        const double gb = (gbar * rf.b)(0, 0);
        const Vector dx = ctx.x - ctx.x_prev_hist * sol.l;
        const double bracket = (sol.mu0 * ctx.s + ctx.xi_t * sgn(ctx.s) + gbar * rf.a * dx - ctx.s + ctx.varpi_hat +
                                gbar * ctx.x_hist * sol.l)(0);
        const double u = (ctx.u_prev_hist * sol.l)(0) - bracket / gb;
        CHECK(std::abs(out.u(0) - u) <= 1e-12 * std::max(1.0, std::abs(u)));
        CHECK((ctx.x - (ctx.x_prev_hist * sol.l + out.residuals.delta_x)).norm() <= 1e-14 * (1.0 + ctx.x.norm()));
    }
}

TEST_CASE("G block closed form for a single unactuated state") {
    // n_x - n_u = 1: block (ii) vanishes at G = -c Lᵀ𝒳₁ᵀ (𝒳₁LLᵀ𝒳₁ᵀ)⁺
    Plant p;
    p.a_tilde = Matrix(3, 3);
    p.a_tilde << 0.5, 0.3, -0.2, 0.1, 0.7, 0.4, -0.3, 0.2, 0.6;
    p.b_tilde = Matrix(3, 2);
    p.b_tilde << 0, 0, 1, 0.2, 0.3, 1;
    p.d = Matrix::Zero(3, 1);
    p.e = Matrix::Zero(1, 3);
    p.delta = Matrix::Zero(1, 1);
    const RegularForm rf = to_regular_form(p);
    REQUIRE(rf.n1() == 1);
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const CoDesignContext ctx = random_codesign_context(rf, 2, rng);
        const Vector l = random_vector(2, rng);
        const double mu0 = 0.4;
        const ResidualFn block = [&](const Vector& gv) -> Vector {
            const Matrix g = Eigen::Map<const Matrix>(gv.data(), 2, 1);
            const Matrix r = stationarity_blocks({l, g, mu0}, ctx).wrt_g;
            return Eigen::Map<const Vector>(r.data(), r.size());
        };
        const LmResult res = levenberg_marquardt(block, Vector::Zero(2));
        const Matrix x1 = ctx.x_hist.topRows(1);
        const Vector c = mu0 * ctx.s + ctx.xi_t * sgn(ctx.s) - ctx.s + ctx.varpi_hat;
        const Matrix v = x1 * l;
        const Matrix closed = -c * v.transpose() * (v * v.transpose()).completeOrthogonalDecomposition().pseudoInverse();
        CHECK(res.converged);
        CHECK((res.solution - Eigen::Map<const Vector>(closed.data(), 2)).norm() <= 1e-8 * (1.0 + closed.norm()));
    }
}

TEST_CASE("QSMB band by hand") {
    const double mu_hist[] = {0.1};
    const QsmbBand b = qsmb_omega(0.01, 0.0, 1, mu_hist);
    const double phi = 0.01 * 0.01 / (2.0 * 0.9 * 0.01);
    const double eta = 0.9 * 0.01;
    CHECK(b.phi_bar == doctest::Approx(phi).epsilon(1e-14));
    CHECK(b.eta == doctest::Approx(eta).epsilon(1e-14));
    CHECK(b.omega == doctest::Approx(std::sqrt(phi * phi + 2 * eta * phi)).epsilon(1e-14));
    CHECK(b.omega == doctest::Approx(0.011439).epsilon(1e-4));
}

TEST_CASE("QSMB band errors") {
    const double mu_hist[] = {0.1};
    CHECK_THROWS_AS(qsmb_omega(0.01, 0.01, 1, mu_hist), BandUndefined);
    CHECK_THROWS_AS(qsmb_omega(0.01, 0.02, 1, mu_hist), BandUndefined);
    CHECK_NOTHROW(qsmb_omega(0.01, 0.012, 2, mu_hist));  // √2 · 0.01 > 0.012
    CHECK_THROWS(qsmb_omega(0.01, 0.0, 1, std::span<const double>{}));
}

TEST_CASE("QSMB band is attained at the largest mu") {
    const double mu_hist[] = {0.01, 0.99};
    const QsmbBand b = qsmb_omega(0.01, 0.005, 1, mu_hist);
    CHECK(b.omega == band_for(0.99, 0.01, 0.005, 1).omega);
    CHECK(band_for(0.99, 0.01, 0.005, 1).phi_bar > band_for(0.01, 0.01, 0.005, 1).phi_bar);
}

TEST_CASE("property: band radius grows with mu") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double xi = 0.001 + u(rng), db = u(rng) * xi * 0.99;
        const double m1 = 0.01 + 0.97 * u(rng), m2 = m1 + (0.99 - m1) * u(rng);
        CHECK(band_for(m2, xi, db, 1).omega >= band_for(m1, xi, db, 1).omega);
    }
}

TEST_CASE("band policy") {
    QsmbBand b;
    b.omega = 0.5;
    CHECK(band_policy(Vector::Zero(1), b) == BandDecision::frozen);
    CHECK(band_policy(Vector::Constant(1, 0.5), b) == BandDecision::frozen);
    CHECK(band_policy(Vector::Constant(1, std::nextafter(0.5, 1.0)), b) == BandDecision::co_design);
}

TEST_CASE("example run: frozen gain stays constant while in band") {
    const ExperimentConfig cfg = example_config();
    const TrajectoryLog log = run_experiment(cfg);
    for (std::size_t k = 1; k < log.rows.size(); ++k) {
        if (log.rows[k].in_band) {
            CHECK(log.rows[k].g_next == log.rows[k - 1].g_next);
            CHECK(log.rows[k].mu0 == log.rows[k - 1].mu0);
        }
    }
}

TEST_CASE("example run: solve quality and clamp interval") {
    const ExperimentConfig cfg = example_config();
    const TrajectoryLog log = run_experiment(cfg);
    int out_of_band = 0;
    for (const auto& r : log.rows) {
        CHECK(r.mu0 >= 0.01);
        CHECK(r.mu0 <= 0.99);
        if (!r.in_band) {
            ++out_of_band;
            CHECK((r.residual_norm < 1e-8 || r.clamped || r.fallback));
        }
    }
    CHECK(out_of_band >= 1);
}

TEST_CASE("property: trajectory identities over random initial states") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> delta(-1.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
        ExperimentConfig cfg = example_config(delta(rng), false);
        cfg.x0 = random_vector(3, rng, 5.0);
        cfg.window = 1 + trial % 3;
        cfg.horizon = 60;
        const TrajectoryLog log = run_experiment(cfg);
        const RegularForm rf = to_regular_form(cfg.plant);
        for (std::size_t k = 0; k < log.rows.size(); ++k) {
            const auto& r = log.rows[k];
            const Matrix w = state_window(log, static_cast<StepIndex>(k) - 1, cfg.window);
            CHECK((r.x - (w * r.l + r.delta_x)).norm() <= 1e-13 * (1.0 + r.x.norm() + w.norm() * r.l.norm()));
            CHECK(r.mu0 >= 0.01);
            CHECK(r.mu0 <= 0.99);
        }
        CHECK(prediction_identity_error(log, rf, cfg.plant.delta) <= 1e-9);
        const BandInvariance bi = band_invariance(log, cfg.reaching.xi_t);
        if (bi.precondition && bi.entry >= 0) {
            CHECK(bi.max_excess <= 1e-6);
        }
        for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
            const auto& r = log.rows[k];
            if (r.in_band || !bi.precondition) continue;
            if (r.s_norm > band_for(r.mu0, 0.01, 0.005, 1).phi_bar) {
                CHECK(log.rows[k + 1].s.squaredNorm() < r.s.squaredNorm());
            }
        }
    }
}
