#include "imsmc/input_mapping.hpp"

#include <cmath>

namespace imsmc {

HistoryBuffer::HistoryBuffer(Index nx, Index nu, Index window)
    : states_(Matrix::Zero(nx, window)), inputs_(Matrix::Zero(nu, window)) {
    if (window < 1) {
        throw std::invalid_argument("history window must be at least 1");
    }
}

Matrix HistoryBuffer::shifted_states(const Vector& x_now) const {
    Matrix next(states_.rows(), states_.cols());
    next.col(0) = x_now;
    next.rightCols(states_.cols() - 1) = states_.leftCols(states_.cols() - 1);
    return next;
}

void HistoryBuffer::push(const Vector& x, const Vector& u) {
    const Index n = states_.cols();
    if (n > 1) {
        states_.rightCols(n - 1) = states_.leftCols(n - 1).eval();
        inputs_.rightCols(n - 1) = inputs_.leftCols(n - 1).eval();
    }
    states_.col(0) = x;
    inputs_.col(0) = u;
}

CoDesignContext make_context(const RegularForm& rf, const HistoryBuffer& history, const Vector& x,
                             const Vector& s, const Vector& varpi_hat, double xi_t) {
    CoDesignContext ctx;
    ctx.a = rf.a;
    ctx.b = rf.b;
    ctx.n1 = rf.n1();
    ctx.x_prev_hist = history.states();
    ctx.u_prev_hist = history.inputs();
    ctx.x_hist = history.shifted_states(x);
    ctx.x = x;
    ctx.s = s;
    ctx.varpi_hat = varpi_hat;
    ctx.xi_t = xi_t;
    return ctx;
}

Vector pack_decision(const Decision& d) {
    Vector omega(d.l.size() + d.g.size() + 1);
    omega.head(d.l.size()) = d.l;
    omega.segment(d.l.size(), d.g.size()) = Eigen::Map<const Vector>(d.g.data(), d.g.size());
    omega(omega.size() - 1) = d.mu0;
    return omega;
}

Decision unpack_decision(const Vector& omega, const CoDesignContext& ctx) {
    if (omega.size() != ctx.decision_size()) {
        throw std::invalid_argument("decision vector has the wrong length");
    }
    Decision d;
    d.l = omega.head(ctx.window());
    d.g = Eigen::Map<const Matrix>(omega.data() + ctx.window(), ctx.nu(), ctx.n1);
    d.mu0 = omega(omega.size() - 1);
    return d;
}

Matrix augmented_gain(const Matrix& g) {
    Matrix gbar(g.rows(), g.cols() + g.rows());
    gbar.leftCols(g.cols()) = g;
    gbar.rightCols(g.rows()) = Matrix::Identity(g.rows(), g.rows());
    return gbar;
}

namespace {

// B(ḠB)⁻¹
Matrix input_projector(const CoDesignContext& ctx, const Matrix& gbar) {
    const Matrix gb = gbar * ctx.b;
    return ctx.b * gb.partialPivLu().inverse();
}

// μ̄₀ s + ξT sgn s - s + ϖ̂
Vector reaching_target(const CoDesignContext& ctx, double mu0) {
    Vector c = mu0 * ctx.s;
    c += ctx.xi_t * sgn(ctx.s);
    c -= ctx.s;
    c += ctx.varpi_hat;
    return c;
}

struct Terms {
    Matrix w;
    Matrix proj;
    Vector c;
    Vector r;  // W L - B(ḠB)⁻¹ c
};

Terms evaluate(const Vector& l, const Matrix& g_next, double mu0, const CoDesignContext& ctx) {
    Terms t;
    const Matrix gbar = augmented_gain(g_next);
    t.proj = input_projector(ctx, gbar);
    t.w = ctx.x_hist - t.proj * (gbar * ctx.x_hist);
    t.c = reaching_target(ctx, mu0);
    t.r = t.w * l - t.proj * t.c;
    return t;
}

Vector flatten_g_block(const Matrix& block) {
    const Matrix bt = block.transpose();
    return Eigen::Map<const Vector>(bt.data(), bt.size());
}

}  // namespace

Matrix mapping_matrix(const CoDesignContext& ctx, const Matrix& g_next) {
    const Matrix gbar = augmented_gain(g_next);
    return ctx.x_hist - input_projector(ctx, gbar) * (gbar * ctx.x_hist);
}

double objective_j(const Vector& l, const Matrix& g_next, double mu0, const CoDesignContext& ctx) {
    return evaluate(l, g_next, mu0, ctx).r.squaredNorm();
}

StationarityBlocks stationarity_blocks(const Decision& d, const CoDesignContext& ctx) {
    const Terms t = evaluate(d.l, d.g, d.mu0, ctx);
    const Matrix x1 = ctx.x_hist.topRows(ctx.n1);
    const Vector x1l = x1 * d.l;

    StationarityBlocks blocks;
    blocks.wrt_l = 2.0 * t.w.transpose() * t.r;
    blocks.wrt_g = 2.0 * x1l * x1l.transpose() * d.g.transpose() + 2.0 * x1l * t.c.transpose();
    blocks.wrt_mu0 = 2.0 * (-(t.proj * ctx.s)).dot(t.r);
    return blocks;
}

Vector stationarity_residual(const Vector& omega, const CoDesignContext& ctx) {
    const StationarityBlocks b = stationarity_blocks(unpack_decision(omega, ctx), ctx);
    Vector r(ctx.decision_size());
    r.head(ctx.window()) = b.wrt_l;
    r.segment(ctx.window(), b.wrt_g.size()) = flatten_g_block(b.wrt_g);
    r(r.size() - 1) = b.wrt_mu0;
    return r;
}

Vector solve_l_block(const CoDesignContext& ctx, const Matrix& g_next, double mu0) {
    const Terms t = evaluate(Vector::Zero(ctx.window()), g_next, mu0, ctx);
    const Vector rhs = t.proj * t.c;
    if (t.w.isZero(0.0)) {
        return Vector::Zero(ctx.window());
    }
    return t.w.completeOrthogonalDecomposition().solve(rhs);
}

CoDesignSolution frozen_solution(const CoDesignContext& ctx, const Matrix& g_keep, double mu0_keep) {
    CoDesignSolution sol;
    sol.g_next = g_keep;
    sol.mu0 = mu0_keep;
    sol.l = solve_l_block(ctx, g_keep, mu0_keep);
    sol.residual_norm = stationarity_blocks({sol.l, g_keep, mu0_keep}, ctx).wrt_l.norm();
    sol.frozen = true;
    return sol;
}

CoDesignSolution co_design_solve(const CoDesignContext& ctx, const CoDesignOptions& opts, const Matrix& g_prev,
                                 double mu0_prev) {
    const Vector omega0 = Vector::Zero(ctx.decision_size());
    const ResidualFn full = [&ctx](const Vector& omega) { return stationarity_residual(omega, ctx); };

    const auto fall_back = [&](int iterations) {
        CoDesignSolution sol = frozen_solution(ctx, g_prev, mu0_prev);
        sol.frozen = false;
        sol.fallback = true;
        sol.iterations = iterations;
        return sol;
    };

    LmResult lm;
    try {
        lm = levenberg_marquardt(full, omega0, opts.lm);
    } catch (const std::exception&) {
        return fall_back(0);
    }
    if (!(lm.residual_norm <= opts.accept_residual)) {
        return fall_back(lm.iterations);
    }

    const Decision d = unpack_decision(lm.solution, ctx);
    CoDesignSolution sol;
    sol.l = d.l;
    sol.g_next = d.g;
    sol.mu0 = d.mu0;
    sol.residual_norm = lm.residual_norm;
    sol.iterations = lm.iterations;

    if (d.mu0 >= opts.mu0_min && d.mu0 <= opts.mu0_max) {
        return sol;
    }

    // μ̄₀ outside the admissible interval: pin it and re-solve the L and G
    // blocks only, again from zero.
    const double pinned = d.mu0 > opts.mu0_max ? opts.mu0_max : opts.mu0_min;
    const Index nlg = ctx.window() + ctx.nu() * ctx.n1;
    const ResidualFn partial = [&ctx, pinned, nlg](const Vector& lg) {
        Vector omega(ctx.decision_size());
        omega.head(nlg) = lg;
        omega(nlg) = pinned;
        return Vector(stationarity_residual(omega, ctx).head(nlg));
    };
    LmResult lm2;
    try {
        lm2 = levenberg_marquardt(partial, Vector::Zero(nlg), opts.lm);
    } catch (const std::exception&) {
        return fall_back(lm.iterations);
    }
    if (!(lm2.residual_norm <= opts.accept_residual)) {
        return fall_back(lm.iterations + lm2.iterations);
    }
    Vector omega(ctx.decision_size());
    omega.head(nlg) = lm2.solution;
    omega(nlg) = pinned;
    const Decision d2 = unpack_decision(omega, ctx);
    sol.l = d2.l;
    sol.g_next = d2.g;
    sol.mu0 = pinned;
    sol.residual_norm = lm2.residual_norm;
    sol.iterations += lm2.iterations;
    sol.clamped = true;
    return sol;
}

QsmbBand band_for(double mu0, double xi_t, double delta_bar, Index nu) {
    const double switching = std::sqrt(static_cast<double>(nu)) * xi_t;
    if (!(switching > delta_bar)) {
        throw BandUndefined("band undefined: sqrt(n_u) * xi_t must exceed delta_bar");
    }
    if (!(mu0 < 1.0)) {
        throw BandUndefined("band undefined: mu0 must be below 1");
    }
    QsmbBand band;
    band.delta_bar = delta_bar;
    band.eta = (1.0 - mu0) * (switching - delta_bar);
    const double sum = switching + delta_bar;
    band.phi_bar = sum * sum / (2.0 * (1.0 - mu0) * (switching - delta_bar));
    band.omega = std::sqrt(band.phi_bar * band.phi_bar + 2.0 * band.eta * band.phi_bar);
    return band;
}

QsmbBand qsmb_omega(double xi_t, double delta_bar, Index nu, std::span<const double> mu0_history) {
    if (mu0_history.empty()) {
        throw std::invalid_argument("qsmb_omega: empty mu0 history");
    }
    QsmbBand best = band_for(mu0_history.front(), xi_t, delta_bar, nu);
    for (double mu0 : mu0_history.subspan(1)) {
        const QsmbBand band = band_for(mu0, xi_t, delta_bar, nu);
        if (band.omega > best.omega) {
            best = band;
        }
    }
    return best;
}

BandDecision band_policy(const Vector& s_now, const QsmbBand& band) {
    return s_now.norm() <= band.omega ? BandDecision::frozen : BandDecision::co_design;
}

ImsmcOutput imsmc_control(const CoDesignContext& ctx, const CoDesignSolution& sol) {
    const Matrix gbar = augmented_gain(sol.g_next);
    ImsmcOutput out;
    out.residuals.delta_x = ctx.x - ctx.x_prev_hist * sol.l;
    Vector bracket = reaching_bracket(ctx.s, gbar * (ctx.a * out.residuals.delta_x), ctx.varpi_hat, sol.mu0,
                                      ctx.xi_t);
    bracket += gbar * (ctx.x_hist * sol.l);
    const Matrix gb = gbar * ctx.b;
    out.residuals.delta_u = -gb.partialPivLu().solve(bracket);
    out.u = ctx.u_prev_hist * sol.l + out.residuals.delta_u;
    return out;
}

}  // namespace imsmc
