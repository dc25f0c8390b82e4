#include "imsmc/surface_design.hpp"

#include <cmath>
#include <random>

namespace imsmc {

SurfaceGain::SurfaceGain(Matrix g) : g_(std::move(g)) {
    g_bar_.resize(g_.rows(), g_.cols() + g_.rows());
    g_bar_.leftCols(g_.cols()) = g_;
    g_bar_.rightCols(g_.rows()) = Matrix::Identity(g_.rows(), g_.rows());
}

Matrix quadratic_stability_block(const RegularForm& rf, const Matrix& r1, const Matrix& rg, double gamma) {
    const Index p = rf.n1();
    const Index ne = rf.e_bar.rows();
    const Matrix top_mid = r1 * rf.a11.transpose() - rg.transpose() * rf.a12.transpose();
    const Matrix top_right = r1 * rf.e_bar1.transpose() - rg.transpose() * rf.e_bar2.transpose();

    Matrix m = Matrix::Zero(2 * p + ne, 2 * p + ne);
    m.block(0, 0, p, p) = -r1;
    m.block(0, p, p, p) = top_mid;
    m.block(0, 2 * p, p, ne) = top_right;
    m.block(p, 0, p, p) = top_mid.transpose();
    m.block(p, p, p, p) = -r1 + gamma * rf.d_bar1 * rf.d_bar1.transpose();
    m.block(2 * p, 0, ne, p) = top_right.transpose();
    m.block(2 * p, 2 * p, ne, ne) = -gamma * Matrix::Identity(ne, ne);
    return m;
}

double stability_margin(const RegularForm& rf, const Matrix& r1, const Matrix& rg, double gamma) {
    Matrix m = quadratic_stability_block(rf, r1, rg, gamma);
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    return -eig.eigenvalues().maxCoeff();
}

namespace {

// Symmetric p×p matrix from its upper-triangular packing.
Matrix unpack_symmetric(const Vector& z, Index offset, Index p) {
    Matrix m(p, p);
    Index idx = offset;
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i <= j; ++i) {
            m(i, j) = z(idx);
            m(j, i) = z(idx);
            ++idx;
        }
    }
    return m;
}

Vector pack_symmetric(const Matrix& m) {
    const Index p = m.rows();
    Vector z(p * (p + 1) / 2);
    Index idx = 0;
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i <= j; ++i) {
            z(idx++) = m(i, j);
        }
    }
    return z;
}

struct Layout {
    Index p = 0;
    Index nu = 0;
    bool free_rg = true;
    Index n_r1() const { return p * (p + 1) / 2; }
    Index n_rg() const { return free_rg ? nu * p : 0; }
    Index gamma_at() const { return n_r1() + n_rg(); }
    Index tau_at() const { return gamma_at() + 1; }
    Index size() const { return tau_at() + 1; }
};

struct Decoded {
    Matrix r1;
    Matrix rg;
    double gamma;
    double tau;
};

Decoded decode(const Layout& lay, const Vector& z, const Matrix& fixed_g) {
    Decoded d;
    d.r1 = unpack_symmetric(z, 0, lay.p);
    if (lay.free_rg) {
        d.rg = Eigen::Map<const Matrix>(z.data() + lay.n_r1(), lay.nu, lay.p);
    } else {
        d.rg = fixed_g * d.r1;
    }
    d.gamma = z(lay.gamma_at());
    d.tau = z(lay.tau_at());
    return d;
}

LmiSolution solve_lmi(const RegularForm& rf, const LmiOptions& opts, bool free_rg, const Matrix& fixed_g) {
    Layout lay;
    lay.p = rf.n1();
    lay.nu = rf.nu();
    lay.free_rg = free_rg;
    if (lay.p < 1) {
        throw std::invalid_argument("LMI design needs n_x - n_u >= 1");
    }
    const Index n = lay.size();

    lmi::Problem problem;
    problem.cost = Vector::Zero(n);
    problem.cost(lay.tau_at()) = 1.0;

    const Index dim = 2 * lay.p + rf.e_bar.rows();
    problem.blocks.push_back(lmi::linearize(
        [&](const Vector& z) {
            const Decoded d = decode(lay, z, fixed_g);
            return Matrix(quadratic_stability_block(rf, d.r1, d.rg, d.gamma) -
                          d.tau * Matrix::Identity(dim, dim));
        },
        n));
    // Homogeneity of the block lets R₁ ⪯ I normalize without losing feasibility.
    problem.blocks.push_back(lmi::linearize(
        [&](const Vector& z) {
            return Matrix(unpack_symmetric(z, 0, lay.p) - Matrix::Identity(lay.p, lay.p));
        },
        n));
    problem.blocks.push_back(lmi::linearize(
        [&](const Vector& z) { return Matrix::Constant(1, 1, z(lay.gamma_at()) - opts.gamma_max); }, n));
    for (Index i = 0; i < lay.n_rg(); ++i) {
        const Index at = lay.n_r1() + i;
        problem.blocks.push_back(
            lmi::linearize([&, at](const Vector& z) { return Matrix::Constant(1, 1, z(at) - opts.rg_max); }, n));
        problem.blocks.push_back(
            lmi::linearize([&, at](const Vector& z) { return Matrix::Constant(1, 1, -z(at) - opts.rg_max); }, n));
    }

    Vector z0 = Vector::Zero(n);
    z0.head(lay.n_r1()) = pack_symmetric(0.5 * Matrix::Identity(lay.p, lay.p));
    z0(lay.gamma_at()) = 1.0;
    {
        const Decoded d = decode(lay, z0, fixed_g);
        const double margin = stability_margin(rf, d.r1, d.rg, d.gamma);
        z0(lay.tau_at()) = -margin + 1.0;
    }

    const lmi::BarrierResult res = lmi::solve(problem, z0, opts.barrier);
    Decoded d = decode(lay, res.z, fixed_g);

    LmiSolution sol;
    sol.r1 = d.r1;
    sol.rg = d.rg;
    sol.gamma = d.gamma;
    sol.certificate = stability_margin(rf, sol.r1, sol.rg, sol.gamma);
    if (sol.certificate > 0.0 && sol.certificate <= opts.margin_tol) {
        // The block is linear in (R₁, R_g, γ): scaling preserves G and the sign
        // pattern while stretching the margin.
        const double scale = 2.0 * opts.margin_tol / sol.certificate;
        sol.r1 *= scale;
        sol.rg *= scale;
        sol.gamma *= scale;
        sol.certificate = stability_margin(rf, sol.r1, sol.rg, sol.gamma);
    }
    if (!(sol.certificate > opts.margin_tol)) {
        throw InfeasibleLmi("infeasible within iteration budget: best margin " + std::to_string(sol.certificate));
    }
    sol.g = free_rg ? Matrix(sol.rg * sol.r1.inverse()) : fixed_g;
    return sol;
}

}  // namespace

LmiSolution design_g_lmi(const RegularForm& rf, const LmiOptions& opts) {
    return solve_lmi(rf, opts, true, Matrix());
}

LmiSolution certify_gain(const RegularForm& rf, const Matrix& g, const LmiOptions& opts) {
    if (g.rows() != rf.nu() || g.cols() != rf.n1()) {
        throw std::invalid_argument("certify_gain: G must be n_u x (n_x - n_u)");
    }
    return solve_lmi(rf, opts, false, g);
}

Matrix sliding_dynamics(const RegularForm& rf, const Matrix& g, const Matrix& delta) {
    const Matrix a11 = rf.a11 + rf.d_bar1 * delta * rf.e_bar1;
    const Matrix a12 = rf.a12 + rf.d_bar1 * delta * rf.e_bar2;
    return a11 - a12 * g;
}

double spectral_radius(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Matrix> eig(m, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

StabilityReport verify_quadratic_stability(const RegularForm& rf, const SurfaceGain& g,
                                           const std::vector<Matrix>& delta_grid) {
    StabilityReport report;
    report.spectral_radii.reserve(delta_grid.size());
    for (const auto& delta : delta_grid) {
        report.spectral_radii.push_back(spectral_radius(sliding_dynamics(rf, g.g(), delta)));
    }
    report.stable = !delta_grid.empty();
    for (double rho : report.spectral_radii) {
        report.max_radius = std::max(report.max_radius, rho);
        report.stable = report.stable && rho < 1.0;
    }
    return report;
}

std::vector<Matrix> default_delta_grid(const RegularForm& rf, int count, std::uint64_t seed) {
    const Index nd = rf.d_bar.cols();
    const Index ne = rf.e_bar.rows();
    if (rf.d_bar.isZero(0.0) || rf.e_bar.isZero(0.0) || count < 1) {
        return {Matrix::Zero(nd, ne)};
    }
    std::vector<Matrix> grid;
    grid.reserve(static_cast<std::size_t>(count));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        const double c = count == 1 ? 1.0 : -1.0 + 2.0 * i / (count - 1);
        if (nd * ne == 1) {
            grid.push_back(Matrix::Constant(1, 1, c));
            continue;
        }
        Matrix dir(nd, ne);
        for (Index j = 0; j < dir.size(); ++j) {
            dir(j) = normal(rng);
        }
        Eigen::JacobiSVD<Matrix> svd(dir);
        grid.push_back(c * dir / svd.singularValues()(0));
    }
    return grid;
}

}  // namespace imsmc
