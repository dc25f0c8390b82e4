#pragma once

#include <span>
#include <stdexcept>

#include "imsmc/nlsolve.hpp"
#include "imsmc/plant.hpp"
#include "imsmc/reaching.hpp"

namespace imsmc {

// Sliding window of the last N states and inputs, newest first. Starts at zero.
class HistoryBuffer {
  public:
    HistoryBuffer(Index nx, Index nu, Index window);

    Index window() const { return states_.cols(); }

    // 𝒳(k-1) = [x(k-1) … x(k-N)]
    const Matrix& states() const { return states_; }
    // 𝒰(k-1) = [u(k-1) … u(k-N)]
    const Matrix& inputs() const { return inputs_; }

    // 𝒳(k) = [x(k) x(k-1) … x(k-N+1)], i.e. the state window after x_now is pushed.
    Matrix shifted_states(const Vector& x_now) const;

    // Prepends (x, u) and drops the oldest column.
    void push(const Vector& x, const Vector& u);

  private:
    Matrix states_;
    Matrix inputs_;
};

// Everything one co-design solve at step k looks at.
struct CoDesignContext {
    Matrix a;           // regular-form A
    Matrix b;           // regular-form B = [0; B₁]
    Index n1 = 0;       // n_x - n_u
    Matrix x_prev_hist; // 𝒳(k-1)
    Matrix u_prev_hist; // 𝒰(k-1)
    Matrix x_hist;      // 𝒳(k)
    Vector x;           // x(k)
    Vector s;           // s(k) = Ḡ(k) x(k)
    Vector varpi_hat;   // ϖ̂(k-1)
    double xi_t = 0.0;

    Index window() const { return x_hist.cols(); }
    Index nu() const { return b.cols(); }
    Index decision_size() const { return window() + nu() * n1 + 1; }
};

CoDesignContext make_context(const RegularForm& rf, const HistoryBuffer& history, const Vector& x,
                             const Vector& s, const Vector& varpi_hat, double xi_t);

// ω = col(L, G⁽¹⁾ … G⁽ⁿ¹⁾, μ̄₀), G packed column by column.
struct Decision {
    Vector l;
    Matrix g;
    double mu0 = 0.0;
};

Vector pack_decision(const Decision& d);
Decision unpack_decision(const Vector& omega, const CoDesignContext& ctx);

// Ḡ = [G I]
Matrix augmented_gain(const Matrix& g);

// W(k) = 𝒳(k) - B(ḠB)⁻¹Ḡ𝒳(k)
Matrix mapping_matrix(const CoDesignContext& ctx, const Matrix& g_next);

// J = ‖W L - B(ḠB)⁻¹[μ̄₀ s + ξT sgn s - s + ϖ̂]‖²
double objective_j(const Vector& l, const Matrix& g_next, double mu0, const CoDesignContext& ctx);

// The three stationarity blocks as written: ∂J/∂L (N), the G block
// ((n_x-n_u) × n_u) and ∂J/∂μ̄₀.
struct StationarityBlocks {
    Vector wrt_l;
    Matrix wrt_g;
    double wrt_mu0 = 0.0;
};

StationarityBlocks stationarity_blocks(const Decision& d, const CoDesignContext& ctx);

// Concatenation (∂L, vec(G blockᵀ), ∂μ̄₀); the G block is transposed so its
// entries line up with the packing of G in ω.
Vector stationarity_residual(const Vector& omega, const CoDesignContext& ctx);

struct CoDesignSolution {
    Vector l;
    Matrix g_next;
    double mu0 = 0.0;
    double residual_norm = 0.0;
    bool clamped = false;
    bool fallback = false;
    bool frozen = false;
    int iterations = 0;
};

struct CoDesignOptions {
    LmOptions lm{};
    double mu0_min = 0.01;
    double mu0_max = 0.99;
    // A solve is accepted when its stationarity residual drops below this.
    double accept_residual = 1e-8;
};

// Least-squares solution of the L block for frozen (G, μ̄₀): min-norm L with
// W L ≈ B(ḠB)⁻¹[μ̄₀ s + ξT sgn s - s + ϖ̂].
Vector solve_l_block(const CoDesignContext& ctx, const Matrix& g_next, double mu0);

// Frozen-band step: keep (G, μ̄₀), solve L only.
CoDesignSolution frozen_solution(const CoDesignContext& ctx, const Matrix& g_keep, double mu0_keep);

// Full co-design from ω = 0, with μ̄₀ clamping and the (L, G) re-solve. When
// LM fails the previous (G, μ̄₀) are kept and L is solved alone (fallback).
CoDesignSolution co_design_solve(const CoDesignContext& ctx, const CoDesignOptions& opts, const Matrix& g_prev,
                                 double mu0_prev);

class BandUndefined : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct QsmbBand {
    double omega = 0.0;
    double eta = 0.0;
    double phi_bar = 0.0;
    double delta_bar = 0.0;
};

// η, Φ̄ and sqrt(Φ̄² + 2ηΦ̄) for a single μ̄₀.
QsmbBand band_for(double mu0, double xi_t, double delta_bar, Index nu);

// Supremum of the band over a μ̄₀ history. Throws BandUndefined unless
// √n_u ξT > δ̄.
QsmbBand qsmb_omega(double xi_t, double delta_bar, Index nu, std::span<const double> mu0_history);

enum class BandDecision { frozen, co_design };

BandDecision band_policy(const Vector& s_now, const QsmbBand& band);

struct ResidualPair {
    Vector delta_x;
    Vector delta_u;
};

struct ImsmcOutput {
    Vector u;
    ResidualPair residuals;
};

// δ_x = x - 𝒳(k-1)L,
// δ_u = -(Ḡ(k+1)B)⁻¹[μ̄₀ s + ξT sgn s + Ḡ(k+1)Aδ_x - s + ϖ̂ + Ḡ(k+1)𝒳(k)L],
// u = 𝒰(k-1)L + δ_u.
ImsmcOutput imsmc_control(const CoDesignContext& ctx, const CoDesignSolution& sol);

}  // namespace imsmc
