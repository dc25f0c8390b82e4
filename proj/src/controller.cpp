#include "imsmc/controller.hpp"

namespace imsmc {

RobustController::RobustController(RegularForm rf, SurfaceGain g, ReachingParams params, CompensatorMode mode)
    : rf_(std::move(rf)), g_(std::move(g)), params_(params) {
    params_.validate();
    comp_ = make_compensator(rf_.nu(), mode, params_.mu0);
    band_ = band_for(params_.mu0, params_.xi_t, params_.delta_bar, rf_.nu());
}

ControlStep RobustController::step(const Vector& x) {
    ControlStep out;
    out.s = g_.sliding(x);
    comp_ = update_compensator(std::move(comp_), out.s, params_.xi_t);
    out.u = robust_smc_control(rf_, g_, x, comp_, params_);
    comp_.mu0_prev = params_.mu0;

    out.g_next = g_.g();
    out.mu0 = params_.mu0;
    out.varpi_hat = comp_.varpi_hat;
    out.varpi_increment = comp_.last_increment;
    out.omega = band_.omega;
    out.in_band = out.s.norm() <= band_.omega;
    return out;
}

ImsmcController::ImsmcController(RegularForm rf, ImsmcParams params)
    : rf_(std::move(rf)),
      params_(std::move(params)),
      history_(rf_.nx(), rf_.nu(), params_.window),
      g_current_(params_.g_init),
      mu0_prev_(params_.mu0_init),
      mu0_sup_(params_.mu0_init) {
    if (g_current_.rows() != rf_.nu() || g_current_.cols() != rf_.n1()) {
        throw std::invalid_argument("initial sliding gain must be n_u x (n_x - n_u)");
    }
    params_.solve.lm.validate();
    comp_ = make_compensator(rf_.nu(), params_.mode, params_.mu0_init);
    // Rejects an undefined band up front rather than at the first step.
    (void)band_for(params_.mu0_init, params_.xi_t, params_.delta_bar, rf_.nu());
}

ControlStep ImsmcController::step(const Vector& x) {
    ControlStep out;
    out.s = augmented_gain(g_current_) * x;
    comp_ = update_compensator(std::move(comp_), out.s, params_.xi_t);

    const QsmbBand band = band_for(mu0_sup_, params_.xi_t, params_.delta_bar, rf_.nu());
    const CoDesignContext ctx = make_context(rf_, history_, x, out.s, comp_.varpi_hat, params_.xi_t);

    CoDesignSolution sol;
    if (band_policy(out.s, band) == BandDecision::frozen) {
        sol = frozen_solution(ctx, g_current_, mu0_prev_);
        out.in_band = true;
    } else {
        sol = co_design_solve(ctx, params_.solve, g_current_, mu0_prev_);
    }
    const ImsmcOutput ctrl = imsmc_control(ctx, sol);

    history_.push(x, ctrl.u);
    g_current_ = sol.g_next;
    mu0_prev_ = sol.mu0;
    mu0_sup_ = std::max(mu0_sup_, sol.mu0);
    comp_.mu0_prev = sol.mu0;

    out.u = ctrl.u;
    out.l = sol.l;
    out.g_next = sol.g_next;
    out.mu0 = sol.mu0;
    out.varpi_hat = comp_.varpi_hat;
    out.varpi_increment = comp_.last_increment;
    out.residual_norm = sol.residual_norm;
    out.omega = band.omega;
    out.clamped = sol.clamped;
    out.fallback = sol.fallback;
    out.delta_x = ctrl.residuals.delta_x;
    out.delta_u = ctrl.residuals.delta_u;
    return out;
}

}  // namespace imsmc
