#pragma once

#include <cstdint>
#include <vector>

#include "imsmc/lmi.hpp"
#include "imsmc/plant.hpp"

namespace imsmc {

// Sliding variable s = [G I] x.
class SurfaceGain {
  public:
    SurfaceGain() = default;
    explicit SurfaceGain(Matrix g);

    const Matrix& g() const { return g_; }
    // Ḡ = [G I]
    const Matrix& g_bar() const { return g_bar_; }

    Vector sliding(const Vector& x) const { return g_bar_ * x; }

  private:
    Matrix g_;
    Matrix g_bar_;
};

struct LmiSolution {
    Matrix r1;     // R⁻¹, symmetric positive definite
    Matrix rg;     // n_u × (n_x - n_u)
    double gamma = 0.0;
    Matrix g;      // R_g R₁⁻¹
    double certificate = 0.0;  // -λ_max of the quadratic-stability block
};

struct LmiOptions {
    double margin_tol = 1e-7;
    double gamma_max = 1e4;
    double rg_max = 1e4;
    lmi::BarrierOptions barrier{};
};

// The symmetric quadratic-stability block
//   [ -R₁                 R₁A₁₁ᵀ - R_gᵀA₁₂ᵀ    R₁Ē₁ᵀ - R_gᵀĒ₂ᵀ ]
//   [  *                 -R₁ + γD̄₁D̄₁ᵀ          0              ]
//   [  *                  *                    -γI             ]
Matrix quadratic_stability_block(const RegularForm& rf, const Matrix& r1, const Matrix& rg, double gamma);

// -λ_max of the block above; positive means strictly feasible.
double stability_margin(const RegularForm& rf, const Matrix& r1, const Matrix& rg, double gamma);

class InfeasibleLmi : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Offline design of G. Throws InfeasibleLmi when no point with margin above
// margin_tol is found.
LmiSolution design_g_lmi(const RegularForm& rf, const LmiOptions& opts = {});

// Same LMI with R_g = G R₁ tied to a given gain: finds (R₁, γ) that certify G
// as quadratically stabilizing. Throws InfeasibleLmi when none is found.
LmiSolution certify_gain(const RegularForm& rf, const Matrix& g, const LmiOptions& opts = {});

// A_g(Δ) = (A₁₁ + D̄₁ΔĒ₁) - (A₁₂ + D̄₁ΔĒ₂) G
Matrix sliding_dynamics(const RegularForm& rf, const Matrix& g, const Matrix& delta);

double spectral_radius(const Matrix& m);

struct StabilityReport {
    std::vector<double> spectral_radii;
    double max_radius = 0.0;
    bool stable = false;
};

StabilityReport verify_quadratic_stability(const RegularForm& rf, const SurfaceGain& g,
                                           const std::vector<Matrix>& delta_grid);

// Default Δ samples: `count` uniform scalars on [-1, 1] when Δ is 1×1, otherwise
// random unit-spectral-norm directions scaled by the same uniform grid. Collapses
// to the single sample Δ = 0 when D̄ or Ē is zero.
std::vector<Matrix> default_delta_grid(const RegularForm& rf, int count = 21, std::uint64_t seed = 1);

}  // namespace imsmc
