#include "imsmc/plant.hpp"

#include <sstream>
#include <string>

namespace imsmc {

namespace {

std::string shape(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

}  // namespace

Vector DisturbanceSchedule::at(StepIndex k, Index n) const {
    Vector f = Vector::Zero(n);
    if (window && k >= window->k_on && k <= window->k_off) {
        f += window->value;
    }
    if (auto it = table.find(k); it != table.end()) {
        f += it->second;
    }
    return f;
}

bool Plant::in_spec() const {
    if (delta.size() == 0) {
        return true;
    }
    Eigen::JacobiSVD<Matrix> svd(delta);
    return svd.singularValues()(0) <= 1.0;
}

bool is_controllable(const Matrix& a, const Matrix& b, double tol) {
    const Index n = a.rows();
    Matrix ctrb(n, n * b.cols());
    Matrix block = b;
    for (Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * b.cols(), b.cols()) = block;
        block = a * block;
    }
    Eigen::FullPivLU<Matrix> lu(ctrb);
    lu.setThreshold(tol);
    return lu.rank() == n;
}

void Plant::validate() const {
    const Index n = a_tilde.rows();
    if (n == 0 || a_tilde.cols() != n) {
        throw PlantError("a_tilde must be square and non-empty, got " + shape(a_tilde));
    }
    if (b_tilde.rows() != n || b_tilde.cols() == 0 || b_tilde.cols() > n) {
        throw PlantError("b_tilde must be " + std::to_string(n) + "xn_u with 1 <= n_u <= n, got " +
                         shape(b_tilde));
    }
    if (d.rows() != n) {
        throw PlantError("d must have " + std::to_string(n) + " rows, got " + shape(d));
    }
    if (e.cols() != n) {
        throw PlantError("e must have " + std::to_string(n) + " columns, got " + shape(e));
    }
    if (delta.rows() != d.cols() || delta.cols() != e.rows()) {
        throw PlantError("delta must be " + std::to_string(d.cols()) + "x" + std::to_string(e.rows()) +
                         ", got " + shape(delta));
    }
    if (disturbance.window && disturbance.window->value.size() != n) {
        throw PlantError("disturbance vector must have length " + std::to_string(n));
    }
    for (const auto& [k, f] : disturbance.table) {
        if (f.size() != n) {
            throw PlantError("disturbance table entry at k=" + std::to_string(k) + " has wrong length");
        }
    }
    Eigen::FullPivLU<Matrix> lu(b_tilde);
    if (lu.rank() != b_tilde.cols()) {
        throw PlantError("b_tilde is rank deficient");
    }
    if (!is_controllable(a_tilde, b_tilde)) {
        throw PlantError("(a_tilde, b_tilde) is not controllable");
    }
}

RegularForm to_regular_form(const Plant& plant) {
    const Index n = plant.state_dim();
    const Index nu = plant.input_dim();
    if (plant.a_tilde.cols() != n || plant.b_tilde.rows() != n || nu == 0 || nu > n) {
        throw PlantError("inconsistent plant dimensions");
    }
    {
        Eigen::FullPivLU<Matrix> lu(plant.b_tilde);
        if (lu.rank() != nu) {
            throw PlantError("b_tilde is rank deficient");
        }
    }
    const Index n1 = n - nu;
    const Matrix b_top = plant.b_tilde.topRows(n1);
    const Matrix b_bot = plant.b_tilde.bottomRows(nu);
    Eigen::FullPivLU<Matrix> lu2(b_bot);
    if (!lu2.isInvertible()) {
        throw PlantError("plant not partitionable: lower n_u x n_u block of b_tilde is singular");
    }
    const Matrix k = b_top * lu2.inverse();

    RegularForm rf;
    rf.t_c = Matrix::Identity(n, n);
    rf.t_c.topRightCorner(n1, nu) = -k;
    rf.t_c_inv = Matrix::Identity(n, n);
    rf.t_c_inv.topRightCorner(n1, nu) = k;

    rf.a = rf.t_c * plant.a_tilde * rf.t_c_inv;
    // The upper block of T_c B̃ is B̃₁ - B̃₁B̃₂⁻¹B̃₂; it is zero by construction,
    // so it is set structurally instead of carrying rounding residue.
    rf.b = Matrix::Zero(n, nu);
    rf.b.bottomRows(nu) = b_bot;

    rf.a11 = rf.a.topLeftCorner(n1, n1);
    rf.a12 = rf.a.topRightCorner(n1, nu);
    rf.a21 = rf.a.bottomLeftCorner(nu, n1);
    rf.a22 = rf.a.bottomRightCorner(nu, nu);
    rf.b1 = b_bot;

    rf.d_bar = rf.t_c * plant.d;
    rf.e_bar = plant.e * rf.t_c_inv;
    rf.d_bar1 = rf.d_bar.topRows(n1);
    rf.d_bar2 = rf.d_bar.bottomRows(nu);
    rf.e_bar1 = rf.e_bar.leftCols(n1);
    rf.e_bar2 = rf.e_bar.rightCols(nu);
    return rf;
}

Vector step(const RegularForm& rf, const Plant& plant, const Vector& x, const Vector& u, StepIndex k) {
    if (x.size() != rf.nx() || u.size() != rf.nu()) {
        throw std::invalid_argument("step: state or input has the wrong length");
    }
    Vector next = (rf.a + rf.delta_a(plant.delta)) * x + rf.b * u;
    if (!plant.disturbance.empty()) {
        next += rf.t_c * plant.disturbance.at(k, rf.nx());
    }
    return next;
}

}  // namespace imsmc
