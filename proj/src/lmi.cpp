#include "imsmc/lmi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace imsmc::lmi {

Matrix AffineBlock::evaluate(const Vector& z) const {
    Matrix f = constant;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        f += z(static_cast<Index>(i)) * coefficients[i];
    }
    return f;
}

AffineBlock linearize(const std::function<Matrix(const Vector&)>& affine_map, Index num_vars) {
    AffineBlock block;
    Vector z = Vector::Zero(num_vars);
    block.constant = affine_map(z);
    block.coefficients.reserve(static_cast<std::size_t>(num_vars));
    for (Index i = 0; i < num_vars; ++i) {
        z(i) = 1.0;
        block.coefficients.push_back(affine_map(z) - block.constant);
        z(i) = 0.0;
    }
    return block;
}

namespace {

// -log det(-F) summed over blocks; +inf when any block is not negative definite.
double barrier_value(const Problem& problem, const Vector& z) {
    double value = 0.0;
    for (const auto& block : problem.blocks) {
        const Matrix neg = -block.evaluate(z);
        Eigen::LLT<Matrix> llt(neg);
        if (llt.info() != Eigen::Success) {
            return std::numeric_limits<double>::infinity();
        }
        const Matrix& l = llt.matrixL();
        double logdet = 0.0;
        for (Index i = 0; i < l.rows(); ++i) {
            if (!(l(i, i) > 0.0)) {
                return std::numeric_limits<double>::infinity();
            }
            logdet += 2.0 * std::log(l(i, i));
        }
        value -= logdet;
    }
    return value;
}

Index total_dimension(const Problem& problem) {
    Index m = 0;
    for (const auto& block : problem.blocks) {
        m += block.constant.rows();
    }
    return m;
}

}  // namespace

bool strictly_feasible(const Problem& problem, const Vector& z) {
    return std::isfinite(barrier_value(problem, z));
}

BarrierResult solve(const Problem& problem, const Vector& z0, const BarrierOptions& opts) {
    const Index n = z0.size();
    if (problem.cost.size() != n) {
        throw std::invalid_argument("lmi::solve: cost and start point disagree in size");
    }
    if (!strictly_feasible(problem, z0)) {
        throw std::invalid_argument("lmi::solve: start point is not strictly feasible");
    }
    BarrierResult out;
    Vector z = z0;
    double t = opts.t_init;
    const double m = static_cast<double>(total_dimension(problem));

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        for (int it = 0; it < opts.max_newton; ++it) {
            Vector grad = t * problem.cost;
            Matrix hess = Matrix::Zero(n, n);
            for (const auto& block : problem.blocks) {
                const Matrix s = (-block.evaluate(z)).inverse();
                std::vector<Matrix> sf(static_cast<std::size_t>(n));
                for (Index i = 0; i < n; ++i) {
                    sf[static_cast<std::size_t>(i)] = s * block.coefficients[static_cast<std::size_t>(i)];
                    grad(i) += sf[static_cast<std::size_t>(i)].trace();
                }
                for (Index i = 0; i < n; ++i) {
                    for (Index j = i; j < n; ++j) {
                        const double h = (sf[static_cast<std::size_t>(i)].array() *
                                          sf[static_cast<std::size_t>(j)].transpose().array())
                                             .sum();
                        hess(i, j) += h;
                        if (j != i) {
                            hess(j, i) += h;
                        }
                    }
                }
            }
            // Unbounded directions (a variable absent from every block) would make
            // the Hessian singular; a tiny ridge keeps the Newton system solvable.
            hess.diagonal().array() += 1e-14 * (1.0 + hess.diagonal().array().abs());
            const Vector dz = hess.ldlt().solve(-grad);
            const double decrement = -grad.dot(dz);
            ++out.newton_steps;
            if (!(decrement > 2.0 * opts.newton_tol)) {
                break;
            }
            const double f0 = t * problem.cost.dot(z) + barrier_value(problem, z);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Vector trial = z + step * dz;
                const double f1 = t * problem.cost.dot(trial) + barrier_value(problem, trial);
                if (std::isfinite(f1) && f1 <= f0 - 0.25 * step * decrement) {
                    z = trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                break;
            }
        }
        out.duality_gap = m / t;
        if (out.duality_gap < opts.gap_tol) {
            out.converged = true;
            break;
        }
        t *= opts.t_growth;
    }
    out.z = z;
    return out;
}

}  // namespace imsmc::lmi
