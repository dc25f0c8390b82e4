#pragma once

#include <map>
#include <optional>
#include <stdexcept>

#include "imsmc/types.hpp"

namespace imsmc {

// Additive state disturbance f(k), expressed in the original plant coordinates.
// A closed window [k_on, k_off] carrying a constant vector, plus an optional
// per-step table. Both contributions are summed when they overlap.
struct DisturbanceSchedule {
    struct Window {
        StepIndex k_on = 0;
        StepIndex k_off = -1;
        Vector value;
    };

    std::optional<Window> window;
    std::map<StepIndex, Vector> table;

    bool empty() const { return !window && table.empty(); }

    // f(k); zero outside the window and the table.
    Vector at(StepIndex k, Index n) const;
};

// Uncertain plant  ς(k+1) = (Ã + DΔE) ς(k) + B̃ u(k) + f(k).
// `delta` is the realization used by the simulator; the controller never sees it.
struct Plant {
    Matrix a_tilde;
    Matrix b_tilde;
    Matrix d;
    Matrix e;
    Matrix delta;
    DisturbanceSchedule disturbance;

    Index state_dim() const { return a_tilde.rows(); }
    Index input_dim() const { return b_tilde.cols(); }

    // ‖Δ‖₂ ≤ 1. Out-of-spec realizations are legal, just flagged.
    bool in_spec() const;

    // Dimension consistency, controllability and the full-column-rank input
    // matrix. Throws std::invalid_argument describing the first violation.
    void validate() const;
};

bool is_controllable(const Matrix& a, const Matrix& b, double tol = 1e-9);

// Coordinates x = T_c ς in which the input matrix is [0; B₁].
struct RegularForm {
    Matrix t_c;
    Matrix t_c_inv;
    Matrix a;
    Matrix b;
    Matrix a11, a12, a21, a22;
    Matrix b1;
    Matrix d_bar, e_bar;  // T_c D and E T_c⁻¹
    Matrix d_bar1, d_bar2;
    Matrix e_bar1, e_bar2;

    Index nx() const { return a.rows(); }
    Index nu() const { return b.cols(); }
    // Dimension of x₁, the unactuated block.
    Index n1() const { return a.rows() - b.cols(); }

    // ΔA = D̄ Δ Ē in regular-form coordinates.
    Matrix delta_a(const Matrix& delta) const { return d_bar * delta * e_bar; }

    Vector upper(const Vector& x) const { return x.head(n1()); }
    Vector lower(const Vector& x) const { return x.tail(nu()); }
};

class PlantError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

RegularForm to_regular_form(const Plant& plant);

// x(k+1) = (A + ΔA) x + B u + T_c f(k).
Vector step(const RegularForm& rf, const Plant& plant, const Vector& x, const Vector& u, StepIndex k);

}  // namespace imsmc
