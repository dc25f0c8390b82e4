#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imsmc/plant.hpp"
#include "imsmc/surface_design.hpp"

namespace imsmc {

struct ReachingParams {
    double mu0 = 0.1;         // μT, lumped converging parameter
    double xi_t = 0.01;       // ξT, lumped switching gain
    double delta_bar = 0.005; // assumed bound on the compensator increment

    void validate() const;
};

// Componentwise sign with sgn(0) = -1 (so -0.0 and NaN map to -1 as well).
Vector sgn(const Vector& v);

enum class CompensatorMode {
    // Running sum of the per-step deviation between the realized and the ideal
    // reaching step. Telescopes to the one-step disturbance estimate.
    one_step,
    // Recomputes the whole deviation sum from the logged sliding history with
    // the current sign and the latest μ̄₀, as the summation is written.
    literal_sum,
    // ϖ̂ ≡ 0; used to check the bare reaching law.
    none,
};

std::string to_string(CompensatorMode mode);
CompensatorMode compensator_mode_from_string(const std::string& name);

// ϖ̂ stays zero until two sliding samples have been seen; the deviation sum
// starts at i = 2.
struct CompensatorState {
    CompensatorMode mode = CompensatorMode::one_step;
    std::optional<Vector> s_prev;
    double mu0_prev = 0.0;
    Vector varpi_hat;
    Vector last_increment;
    long samples = 0;
    std::vector<Vector> s_history;  // literal_sum only
};

CompensatorState make_compensator(Index nu, CompensatorMode mode, double mu0_init);

// Folds in s(k) and returns the state holding ϖ̂(k-1).
CompensatorState update_compensator(CompensatorState c, const Vector& s_now, double xi_t);

// s(k) - [(1 - μ₀) s(k-1) - ξT sgn s(k-1)]
Vector reaching_deviation(const Vector& s_now, const Vector& s_prev, double mu0_prev, double xi_t);

// μ₀ s + ξT sgn s + ḠAx - s + ϖ̂, the bracket shared by the robust and the
// input-mapping laws. Summation order is fixed so both laws agree bitwise when
// the input-mapping terms vanish.
Vector reaching_bracket(const Vector& s, const Vector& g_bar_a_x, const Vector& varpi_hat, double mu0,
                        double xi_t);

// u(k) = -(ḠB)⁻¹[μ₀ s + ξT sgn s + ḠAx - s + ϖ̂(k-1)],  s = Ḡx.
Vector robust_smc_control(const RegularForm& rf, const SurfaceGain& g, const Vector& x,
                          const CompensatorState& c, const ReachingParams& params);

}  // namespace imsmc
