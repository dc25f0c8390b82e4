#include "imsmc/experiment.hpp"

#include <algorithm>

namespace imsmc {

Matrix initial_gain(const ExperimentConfig& cfg, const RegularForm& rf) {
    if (cfg.controller == ControllerKind::imsmc && cfg.g_init) {
        return *cfg.g_init;
    }
    if (cfg.g) {
        return *cfg.g;
    }
    return design_g_lmi(rf).g;
}

namespace {

std::unique_ptr<Controller> make_controller(const ExperimentConfig& cfg, const RegularForm& rf) {
    const Matrix g0 = initial_gain(cfg, rf);
    if (cfg.controller == ControllerKind::robust) {
        return std::make_unique<RobustController>(rf, SurfaceGain(g0), cfg.reaching, cfg.compensator_mode);
    }
    ImsmcParams p;
    p.window = cfg.window;
    p.xi_t = cfg.reaching.xi_t;
    p.delta_bar = cfg.reaching.delta_bar;
    p.mu0_init = cfg.mu0_init.value_or(cfg.reaching.mu0);
    p.g_init = g0;
    p.mode = cfg.compensator_mode;
    p.solve = cfg.solve;
    return std::make_unique<ImsmcController>(rf, p);
}

}  // namespace

TrajectoryLog run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const RegularForm rf = to_regular_form(cfg.plant);
    auto controller = make_controller(cfg, rf);

    TrajectoryLog log;
    log.nx = rf.nx();
    log.nu = rf.nu();
    log.window = cfg.window;
    log.ny = cfg.output_c ? cfg.output_c->rows() : 0;
    log.rows.reserve(static_cast<std::size_t>(cfg.horizon));

    Vector x = rf.t_c * cfg.x0;
    Matrix g_last = initial_gain(cfg, rf);
    for (StepIndex k = 0; k < cfg.horizon; ++k) {
        ControlStep st;
        try {
            st = controller->step(x);
        } catch (const std::exception&) {
            st = ControlStep{};
            st.u = Vector::Zero(rf.nu());
            st.s = augmented_gain(g_last) * x;
            st.g_next = g_last;
            st.fallback = true;
        }
        LogRow row;
        row.k = k;
        row.x = x;
        row.u = st.u;
        row.s = st.s;
        row.s_norm = st.s.norm();
        row.l = st.l.size() == cfg.window ? st.l : Vector::Zero(cfg.window);
        row.g_next = st.g_next;
        row.mu0 = st.mu0;
        row.varpi_hat = st.varpi_hat.size() == rf.nu() ? st.varpi_hat : Vector::Zero(rf.nu());
        row.residual_norm = st.residual_norm;
        row.omega = st.omega;
        row.in_band = st.in_band;
        row.clamped = st.clamped;
        row.fallback = st.fallback;
        row.delta_x = st.delta_x.size() == rf.nx() ? st.delta_x : Vector::Zero(rf.nx());
        row.delta_u = st.delta_u.size() == rf.nu() ? st.delta_u : Vector::Zero(rf.nu());
        if (cfg.output_c) {
            row.y = *cfg.output_c * x;
        }
        g_last = st.g_next;
        x = step(rf, cfg.plant, x, st.u, k);
        log.rows.push_back(std::move(row));
    }
    return log;
}

Metrics compute_metrics(const TrajectoryLog& log, const ExperimentConfig& cfg) {
    if (log.rows.empty()) {
        throw std::invalid_argument("compute_metrics: empty log");
    }
    Metrics m;
    const long len = static_cast<long>(log.rows.size());
    const long sentinel = cfg.horizon + 1;
    const double eps = cfg.settle_eps.value_or(0.02 * cfg.x0.lpNorm<Eigen::Infinity>());

    // Suffix scan: a K qualifies when the next `hold` steps (clipped) stay small.
    std::vector<bool> small(static_cast<std::size_t>(len));
    for (long k = 0; k < len; ++k) {
        small[static_cast<std::size_t>(k)] = log.rows[static_cast<std::size_t>(k)].x.lpNorm<Eigen::Infinity>() <= eps;
    }
    m.settling_time = sentinel;
    long run = 0;  // consecutive small steps starting at k
    std::vector<long> run_from(static_cast<std::size_t>(len));
    for (long k = len - 1; k >= 0; --k) {
        run = small[static_cast<std::size_t>(k)] ? run + 1 : 0;
        run_from[static_cast<std::size_t>(k)] = run;
    }
    for (long k = 0; k < len; ++k) {
        const long need = std::min<long>(cfg.hold, len - 1 - k) + 1;
        if (run_from[static_cast<std::size_t>(k)] >= need) {
            m.settling_time = k;
            break;
        }
    }

    m.band_entry_time = sentinel;
    for (long k = 0; k < len; ++k) {
        const auto& r = log.rows[static_cast<std::size_t>(k)];
        if (r.s_norm <= r.omega) {
            m.band_entry_time = k;
            break;
        }
    }
    for (long k = m.band_entry_time + 1; k < len; ++k) {
        const auto& r = log.rows[static_cast<std::size_t>(k)];
        m.max_band_violation = std::max(m.max_band_violation, r.s_norm - r.omega);
    }

    for (long k = 1; k < len; ++k) {
        const auto& a = log.rows[static_cast<std::size_t>(k - 1)];
        const auto& b = log.rows[static_cast<std::size_t>(k)];
        m.chattering_index += (b.u - a.u).lpNorm<1>();
        m.delta_hat = std::max(m.delta_hat, (b.varpi_hat - a.varpi_hat).norm());
    }

    if (cfg.output_c) {
        const Vector& y = log.rows.back().y;
        const Vector yd = cfg.y_d.size() == y.size() ? cfg.y_d : Vector::Zero(y.size());
        m.final_tracking_error = (y - yd).lpNorm<Eigen::Infinity>();
    }
    return m;
}

}  // namespace imsmc
