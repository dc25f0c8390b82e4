#pragma once

#include <functional>
#include <vector>

#include "imsmc/types.hpp"

namespace imsmc::lmi {

// F(z) = F0 + Σ z_i F_i ≺ 0, every F symmetric.
struct AffineBlock {
    Matrix constant;
    std::vector<Matrix> coefficients;

    Matrix evaluate(const Vector& z) const;
};

// Build the affine block of a map that is known to be affine in z by probing
// it at zero and at each unit vector.
AffineBlock linearize(const std::function<Matrix(const Vector&)>& affine_map, Index num_vars);

// minimize cᵀz  subject to  F_b(z) ≺ 0 for every block b.
struct Problem {
    Vector cost;
    std::vector<AffineBlock> blocks;
};

struct BarrierOptions {
    double t_init = 1.0;
    double t_growth = 20.0;
    double gap_tol = 1e-9;
    int max_outer = 60;
    int max_newton = 80;
    double newton_tol = 1e-11;
};

struct BarrierResult {
    Vector z;
    bool converged = false;
    int newton_steps = 0;
    double duality_gap = 0.0;
};

// True when every block is strictly negative definite at z.
bool strictly_feasible(const Problem& problem, const Vector& z);

// Log-det barrier path following with damped Newton steps. z0 must be
// strictly feasible; every iterate stays strictly feasible.
BarrierResult solve(const Problem& problem, const Vector& z0, const BarrierOptions& opts = {});

}  // namespace imsmc::lmi
