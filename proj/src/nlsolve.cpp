#include "imsmc/nlsolve.hpp"

#include <cmath>
#include <stdexcept>

namespace imsmc {

void LmOptions::validate() const {
    if (max_iter <= 0 || tol_residual <= 0.0 || tol_step <= 0.0 || lambda_init <= 0.0) {
        throw std::invalid_argument("LM options must be positive");
    }
    if (!(lambda_up > 1.0) || !(lambda_down > 0.0 && lambda_down < 1.0)) {
        throw std::invalid_argument("LM options need lambda_up > 1 > lambda_down > 0");
    }
}

Matrix fd_jacobian(const ResidualFn& residual, const Vector& x, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("fd_jacobian: step must be positive");
    }
    Matrix jac;
    Vector xp = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double hi = h * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + hi;
        const Vector rp = residual(xp);
        xp(i) = x(i) - hi;
        const Vector rm = residual(xp);
        xp(i) = x(i);
        if (!rp.allFinite() || !rm.allFinite()) {
            throw std::domain_error("fd_jacobian: non-finite residual near x");
        }
        if (i == 0) {
            jac.resize(rp.size(), x.size());
        }
        jac.col(i) = (rp - rm) / (2.0 * hi);
    }
    return jac;
}

LmResult levenberg_marquardt(const ResidualFn& residual, const Vector& x0, const LmOptions& opts) {
    opts.validate();
    LmResult out;
    Vector x = x0;
    Vector r = residual(x);
    if (!r.allFinite()) {
        throw std::invalid_argument("levenberg_marquardt: residual is not finite at the initial point");
    }
    double norm = r.norm();
    double lambda = opts.lambda_init;
    out.residual_trace.push_back(norm);

    constexpr double kDiagFloor = 1e-12;
    constexpr double kLambdaMax = 1e16;

    while (out.iterations < opts.max_iter) {
        if (norm <= opts.tol_residual) {
            out.converged = true;
            break;
        }
        Matrix jac;
        try {
            jac = fd_jacobian(residual, x);
        } catch (const std::domain_error& e) {
            out.diagnostic = e.what();
            break;
        }
        const Matrix jtj = jac.transpose() * jac;
        const Vector jtr = jac.transpose() * r;
        const Vector diag = jtj.diagonal().cwiseMax(kDiagFloor);

        bool accepted = false;
        bool stalled = false;
        while (!accepted) {
            ++out.iterations;
            out.damping_trace.push_back(lambda);
            Matrix lhs = jtj;
            lhs.diagonal() += lambda * diag;
            const Vector dx = lhs.ldlt().solve(-jtr);
            const Vector trial = x + dx;
            const Vector r_trial = residual(trial);
            if (!dx.allFinite() || !r_trial.allFinite()) {
                out.diagnostic = "non-finite residual during iteration";
                out.solution = x;
                out.residual_norm = norm;
                return out;
            }
            const double trial_norm = r_trial.norm();
            if (trial_norm < norm) {
                accepted = true;
                lambda = std::max(lambda * opts.lambda_down, 1e-300);
                x = trial;
                r = r_trial;
                norm = trial_norm;
                out.residual_trace.push_back(norm);
                if (dx.norm() <= opts.tol_step * (x.norm() + opts.tol_step)) {
                    stalled = true;
                }
            } else {
                lambda *= opts.lambda_up;
                if (dx.norm() <= opts.tol_step * (x.norm() + opts.tol_step)) {
                    // No descent left along any damped direction: stationary point.
                    stalled = true;
                    break;
                }
                if (lambda > kLambdaMax) {
                    out.diagnostic = "damping exceeded 1e16 without a decrease";
                    break;
                }
            }
            if (out.iterations >= opts.max_iter) {
                break;
            }
        }
        if (!out.diagnostic.empty()) {
            break;
        }
        if (norm <= opts.tol_residual || stalled) {
            out.converged = true;
            break;
        }
    }
    out.solution = x;
    out.residual_norm = norm;
    if (norm <= opts.tol_residual) {
        out.converged = true;
    }
    return out;
}

}  // namespace imsmc
