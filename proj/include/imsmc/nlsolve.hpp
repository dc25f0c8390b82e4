#pragma once

#include <functional>
#include <string>
#include <vector>

#include "imsmc/types.hpp"

namespace imsmc {

using ResidualFn = std::function<Vector(const Vector&)>;

struct LmOptions {
    int max_iter = 200;
    double tol_residual = 1e-10;
    double tol_step = 1e-12;
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;

    void validate() const;
};

struct LmResult {
    Vector solution;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    // Damping used for every attempted step, accepted or not.
    std::vector<double> damping_trace;
    // Residual norm after each accepted step, starting with the initial point.
    std::vector<double> residual_trace;
    // Non-empty when the iteration was aborted (non-finite residual, damping blow-up).
    std::string diagnostic;
};

// Central-difference Jacobian. Column i uses the step h * max(1, |x_i|).
Matrix fd_jacobian(const ResidualFn& residual, const Vector& x, double h = 1e-6);

// Damped Gauss-Newton with Marquardt scaling:
//   (JᵀJ + λ diag(JᵀJ)) δ = -Jᵀr,  diag floored at 1e-12.
// Jacobians are finite-difference. Deterministic for identical inputs.
LmResult levenberg_marquardt(const ResidualFn& residual, const Vector& x0, const LmOptions& opts = {});

}  // namespace imsmc
