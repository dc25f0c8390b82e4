#include "imsmc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace imsmc {

namespace {

Matrix random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) {
        for (Index i = 0; i < r; ++i) m(i, j) = u(rng);
    }
    return m;
}

double rel_err(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double rel_err(const Matrix& a, const Matrix& b, double floor) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

CheckResult make(std::string module, std::string name, bool ok, std::string detail) {
    return CheckResult{std::move(module), std::move(name), ok, std::move(detail)};
}

}  // namespace

ExperimentConfig without_disturbance(ExperimentConfig cfg) {
    cfg.plant.disturbance = DisturbanceSchedule{};
    return cfg;
}

CoDesignContext random_codesign_context(const RegularForm& rf, Index window, std::mt19937_64& rng) {
    const Index nx = rf.nx();
    const Index nu = rf.nu();
    HistoryBuffer history(nx, nu, window);
    for (Index i = 0; i < window; ++i) {
        history.push(random_matrix(nx, 1, rng, 3.0), random_matrix(nu, 1, rng, 3.0));
    }
    const Vector x = random_matrix(nx, 1, rng, 3.0);
    const Matrix g = random_matrix(nu, rf.n1(), rng);
    const Vector s = augmented_gain(g) * x;
    const Vector varpi = random_matrix(nu, 1, rng, 0.05);
    return make_context(rf, history, x, s, varpi, 0.01);
}

StationarityBlocks fd_objective_gradient(const Decision& d, const CoDesignContext& ctx, double h) {
    StationarityBlocks out;
    const auto j = [&ctx](const Vector& l, const Matrix& g, double mu) { return objective_j(l, g, mu, ctx); };
    out.wrt_l.resize(d.l.size());
    for (Index i = 0; i < d.l.size(); ++i) {
        const double hi = h * std::max(1.0, std::abs(d.l(i)));
        Vector lp = d.l, lm = d.l;
        lp(i) += hi;
        lm(i) -= hi;
        out.wrt_l(i) = (j(lp, d.g, d.mu0) - j(lm, d.g, d.mu0)) / (2.0 * hi);
    }
    out.wrt_g.resize(d.g.rows(), d.g.cols());
    for (Index c = 0; c < d.g.cols(); ++c) {
        for (Index r = 0; r < d.g.rows(); ++r) {
            const double hi = h * std::max(1.0, std::abs(d.g(r, c)));
            Matrix gp = d.g, gm = d.g;
            gp(r, c) += hi;
            gm(r, c) -= hi;
            out.wrt_g(r, c) = (j(d.l, gp, d.mu0) - j(d.l, gm, d.mu0)) / (2.0 * hi);
        }
    }
    const double hm = h * std::max(1.0, std::abs(d.mu0));
    out.wrt_mu0 = (j(d.l, d.g, d.mu0 + hm) - j(d.l, d.g, d.mu0 - hm)) / (2.0 * hm);
    return out;
}

GradientCheck check_stationarity_gradient(const RegularForm& rf, Index window, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu(0.05, 0.95);
    GradientCheck out;
    for (int n = 0; n < samples; ++n) {
        const CoDesignContext ctx = random_codesign_context(rf, window, rng);
        Decision d;
        d.l = random_matrix(window, 1, rng);
        d.g = random_matrix(rf.nu(), rf.n1(), rng);
        d.mu0 = mu(rng);
        const StationarityBlocks an = stationarity_blocks(d, ctx);
        const StationarityBlocks fd = fd_objective_gradient(d, ctx);
        const double floor = 1e-8 * (1.0 + objective_j(d.l, d.g, d.mu0, ctx));
        out.max_rel_err_l = std::max(out.max_rel_err_l, rel_err(an.wrt_l, fd.wrt_l, floor));
        out.max_rel_err_mu0 = std::max(out.max_rel_err_mu0, rel_err(an.wrt_mu0, fd.wrt_mu0, floor));
        const double eg = rel_err(an.wrt_g, Matrix(fd.wrt_g.transpose()), floor);
        out.max_rel_err_g = std::max(out.max_rel_err_g, eg);
        out.g_block_log.push_back("sample " + std::to_string(n) + ": G block rel err " + sci(eg));
        ++out.samples;
    }
    return out;
}

Matrix state_window(const TrajectoryLog& log, StepIndex k_newest, Index window) {
    Matrix w = Matrix::Zero(log.nx, window);
    for (Index i = 0; i < window; ++i) {
        const StepIndex k = k_newest - i;
        if (k >= 0 && k < static_cast<StepIndex>(log.rows.size())) {
            w.col(i) = log.rows[static_cast<std::size_t>(k)].x;
        }
    }
    return w;
}

double prediction_identity_error(const TrajectoryLog& log, const RegularForm& rf, const Matrix& delta) {
    const Matrix a_true = rf.a + rf.delta_a(delta);
    double worst = 0.0;
    const auto len = static_cast<StepIndex>(log.rows.size());
    for (StepIndex k = log.window + 1; k + 1 < len; ++k) {
        const auto& r = log.rows[static_cast<std::size_t>(k)];
        const Vector& x_next = log.rows[static_cast<std::size_t>(k + 1)].x;
        const Vector lhs = x_next - state_window(log, k, log.window) * r.l;
        const Vector rhs = a_true * r.delta_x + rf.b * r.delta_u;
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, x_next.norm()));
    }
    return worst;
}

BandInvariance band_invariance(const TrajectoryLog& log, double xi_t) {
    BandInvariance out;
    for (std::size_t k = 1; k < log.rows.size(); ++k) {
        out.delta_hat = std::max(out.delta_hat, (log.rows[k].varpi_hat - log.rows[k - 1].varpi_hat).norm());
    }
    out.precondition = std::sqrt(static_cast<double>(log.nu)) * xi_t > out.delta_hat;
    for (std::size_t k = 0; k < log.rows.size(); ++k) {
        const auto& r = log.rows[k];
        if (out.entry < 0 && r.s_norm <= r.omega) {
            out.entry = static_cast<long>(k);
        } else if (out.entry >= 0) {
            out.max_excess = std::max(out.max_excess, r.s_norm - r.omega);
        }
    }
    return out;
}

namespace {

void plant_checks(const ExperimentConfig& cfg, const RegularForm& rf, std::vector<CheckResult>& out) {
    std::mt19937_64 rng(cfg.seed);
    Plant clean = cfg.plant;
    clean.disturbance = DisturbanceSchedule{};
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const Vector x1 = random_matrix(rf.nx(), 1, rng, 5.0), x2 = random_matrix(rf.nx(), 1, rng, 5.0);
        const Vector u1 = random_matrix(rf.nu(), 1, rng, 5.0), u2 = random_matrix(rf.nu(), 1, rng, 5.0);
        const double a = 1.7, b = -0.6;
        const Vector lhs = step(rf, clean, a * x1 + b * x2, a * u1 + b * u2, n);
        const Vector rhs = a * step(rf, clean, x1, u1, n) + b * step(rf, clean, x2, u2, n);
        worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    }
    out.push_back(make("plant", "superposition", worst <= 1e-13, "max rel err " + sci(worst)));

    const double top = rf.b.topRows(rf.n1()).cwiseAbs().maxCoeff();
    out.push_back(make("plant", "regular-form zero block", top == 0.0, "max |B top| = " + sci(top)));

    const double rt = (rf.t_c_inv * rf.t_c - Matrix::Identity(rf.nx(), rf.nx())).cwiseAbs().maxCoeff();
    out.push_back(make("plant", "transform round trip", rt <= 1e-12, "max err " + sci(rt)));
}

void reaching_checks(const ExperimentConfig& cfg, const RegularForm& rf, std::vector<CheckResult>& out) {
    const Matrix g0 = initial_gain(cfg, rf);
    {
        ExperimentConfig nominal = without_disturbance(cfg);
        nominal.plant.delta.setZero();
        nominal.controller = ControllerKind::robust;
        nominal.compensator_mode = CompensatorMode::none;
        nominal.g = g0;
        nominal.horizon = 100;
        const TrajectoryLog log = run_experiment(nominal);
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
            const Vector& s = log.rows[k].s;
            const Vector expect = (1.0 - cfg.reaching.mu0) * s - cfg.reaching.xi_t * sgn(s);
            worst = std::max(worst, (log.rows[k + 1].s - expect).lpNorm<Eigen::Infinity>());
        }
        out.push_back(make("reaching", "nominal reaching identity", worst <= 1e-10, "max err " + sci(worst)));
    }
    {
        ExperimentConfig robust = without_disturbance(cfg);
        robust.controller = ControllerKind::robust;
        robust.g = g0;
        const TrajectoryLog log = run_experiment(robust);
        const BandInvariance bi = band_invariance(log, cfg.reaching.xi_t);
        const double phi =
            band_for(cfg.reaching.mu0, cfg.reaching.xi_t, cfg.reaching.delta_bar, rf.nu()).phi_bar;
        int checked = 0, bad = 0;
        for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
            if (log.rows[k].s_norm > phi) {
                ++checked;
                if (!(log.rows[k + 1].s.squaredNorm() < log.rows[k].s.squaredNorm())) ++bad;
            }
        }
        const bool ok = !bi.precondition || bad == 0;
        out.push_back(make("reaching", "monotone band approach", ok,
                           std::to_string(checked) + " steps above phi_bar, " + std::to_string(bad) +
                               " without decrease; delta_hat " + sci(bi.delta_hat) +
                               (bi.precondition ? "" : " (precondition not met)")));
    }
    {
        std::mt19937_64 rng(cfg.seed + 7);
        std::uniform_real_distribution<double> mag(0.1, 2.0);
        auto one = make_compensator(rf.nu(), CompensatorMode::one_step, cfg.reaching.mu0);
        auto lit = make_compensator(rf.nu(), CompensatorMode::literal_sum, cfg.reaching.mu0);
        double worst = 0.0;
        for (int k = 0; k < 30; ++k) {
            Vector s(rf.nu());
            for (Index i = 0; i < s.size(); ++i) s(i) = mag(rng);
            one = update_compensator(std::move(one), s, cfg.reaching.xi_t);
            lit = update_compensator(std::move(lit), s, cfg.reaching.xi_t);
            worst = std::max(worst, (one.varpi_hat - lit.varpi_hat).norm() / std::max(1.0, one.varpi_hat.norm()));
        }
        out.push_back(make("reaching", "compensator equivalence", worst <= 1e-12, "max rel diff " + sci(worst)));
    }
}

void input_mapping_checks(const ExperimentConfig& cfg, const RegularForm& rf, std::vector<CheckResult>& out) {
    ExperimentConfig im = cfg;
    im.controller = ControllerKind::imsmc;
    const TrajectoryLog log = run_experiment(im);
    {
        double worst = 0.0;
        for (std::size_t k = 0; k < log.rows.size(); ++k) {
            const auto& r = log.rows[k];
            const Matrix w = state_window(log, static_cast<StepIndex>(k) - 1, log.window);
            const double scale = std::max(1.0, w.norm() * r.l.norm() + r.x.norm());
            worst = std::max(worst, (r.x - (w * r.l + r.delta_x)).norm() / scale);
        }
        out.push_back(make("input_mapping", "decomposition identity", worst <= 1e-13, "max rel err " + sci(worst)));
    }
    {
        ExperimentConfig clean = without_disturbance(im);
        const TrajectoryLog clog = run_experiment(clean);
        const double err = prediction_identity_error(clog, rf, cfg.plant.delta);
        out.push_back(make("input_mapping", "prediction identity", err <= 1e-9, "max rel err " + sci(err)));

        const BandInvariance bi = band_invariance(clog, cfg.reaching.xi_t);
        const bool ok = !bi.precondition || bi.entry < 0 || bi.max_excess <= 1e-6;
        out.push_back(make("input_mapping", "band invariance", ok,
                           "entry k=" + std::to_string(bi.entry) + ", max excess " + sci(bi.max_excess) +
                               ", delta_hat " + sci(bi.delta_hat) +
                               (bi.precondition ? "" : " (precondition not met)")));

        int checked = 0, bad = 0;
        for (std::size_t k = 0; k + 1 < clog.rows.size(); ++k) {
            const auto& r = clog.rows[k];
            if (r.in_band) continue;
            const double phi = band_for(r.mu0, cfg.reaching.xi_t, cfg.reaching.delta_bar, rf.nu()).phi_bar;
            if (r.s_norm > phi) {
                ++checked;
                if (!(clog.rows[k + 1].s.squaredNorm() < r.s.squaredNorm())) ++bad;
            }
        }
        out.push_back(make("input_mapping", "lyapunov decrement", !bi.precondition || bad == 0,
                           std::to_string(checked) + " out-of-band steps above phi_bar, " + std::to_string(bad) +
                               " without decrease"));
    }
    {
        const GradientCheck gc = check_stationarity_gradient(rf, cfg.window, 100, cfg.seed);
        const bool ok = gc.max_rel_err_l <= 1e-6 && gc.max_rel_err_mu0 <= 1e-6;
        out.push_back(make("input_mapping", "stationarity gradient", ok,
                           "L " + sci(gc.max_rel_err_l) + ", mu0 " + sci(gc.max_rel_err_mu0) + ", G block (logged) " +
                               sci(gc.max_rel_err_g)));
    }
    {
        double lo = 1.0, hi = 0.0;
        for (const auto& r : log.rows) {
            lo = std::min(lo, r.mu0);
            hi = std::max(hi, r.mu0);
        }
        const bool ok = lo >= cfg.solve.mu0_min && hi <= cfg.solve.mu0_max;
        out.push_back(make("input_mapping", "clamp invariant", ok, "mu0 in [" + sci(lo) + ", " + sci(hi) + "]"));
    }
}

void nlsolve_checks(std::vector<CheckResult>& out) {
    const ResidualFn rosen = [](const Vector& x) {
        Vector r(2);
        r << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
        return r;
    };
    const ResidualFn scaled = [&rosen](const Vector& x) -> Vector { return 10.0 * rosen(x); };
    Vector x0(2);
    x0 << -1.2, 1.0;
    const LmResult a = levenberg_marquardt(rosen, x0);
    const LmResult b = levenberg_marquardt(rosen, x0);
    const LmResult c = levenberg_marquardt(scaled, x0);

    bool mono = true;
    for (std::size_t i = 1; i < a.residual_trace.size(); ++i) {
        mono = mono && a.residual_trace[i] <= a.residual_trace[i - 1];
    }
    out.push_back(make("nlsolve", "accepted-step monotonicity", mono,
                       std::to_string(a.residual_trace.size()) + " accepted residuals"));

    const bool same = a.solution == b.solution && a.residual_trace == b.residual_trace &&
                      a.damping_trace == b.damping_trace && a.iterations == b.iterations;
    out.push_back(make("nlsolve", "determinism", same, same ? "identical iterates" : "iterates differ"));

    const double gap = (a.solution - c.solution).norm();
    out.push_back(make("nlsolve", "scale sanity", a.converged && c.converged && gap <= 1e-8,
                       "solution gap " + sci(gap)));
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const ExperimentConfig& cfg) {
    cfg.validate();
    const RegularForm rf = to_regular_form(cfg.plant);
    std::vector<CheckResult> out;
    plant_checks(cfg, rf, out);
    reaching_checks(cfg, rf, out);
    input_mapping_checks(cfg, rf, out);
    nlsolve_checks(out);
    return out;
}

}  // namespace imsmc
