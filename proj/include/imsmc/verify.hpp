#pragma once

#include <random>
#include <string>
#include <vector>

#include "imsmc/experiment.hpp"

namespace imsmc {

struct CheckResult {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;
};

// A co-design context with random history, state, gain and compensator,
// built on the plant's regular form.
CoDesignContext random_codesign_context(const RegularForm& rf, Index window, std::mt19937_64& rng);

// Central differences of objective_j with respect to L, G (nu x n1) and μ̄₀.
StationarityBlocks fd_objective_gradient(const Decision& d, const CoDesignContext& ctx, double h = 1e-5);

struct GradientCheck {
    int samples = 0;
    double max_rel_err_l = 0.0;
    double max_rel_err_mu0 = 0.0;
    // The G block is compared against the transposed finite difference.
    double max_rel_err_g = 0.0;
    std::vector<std::string> g_block_log;
};

GradientCheck check_stationarity_gradient(const RegularForm& rf, Index window, int samples, std::uint64_t seed);

// 𝒳(k) = [x(k) … x(k-N+1)] rebuilt from a log, zero before k = 0.
Matrix state_window(const TrajectoryLog& log, StepIndex k_newest, Index window);

// Largest ‖x(k+1) - 𝒳(k)L(k) - (A+ΔA)δ_x(k) - Bδ_u(k)‖ relative to max(1, ‖x(k+1)‖)
// over k ≥ N+1. Only meaningful for runs without the disturbance.
double prediction_identity_error(const TrajectoryLog& log, const RegularForm& rf, const Matrix& delta);

struct BandInvariance {
    long entry = -1;  // first k with ‖s(k)‖ ≤ Ω(k), -1 if never
    double max_excess = 0.0;
    double delta_hat = 0.0;
    bool precondition = false;  // √n_u ξT > δ̂
};

BandInvariance band_invariance(const TrajectoryLog& log, double xi_t);

// The invariant suite behind `imsmc verify`.
std::vector<CheckResult> run_verify_suite(const ExperimentConfig& cfg);

// Copy of cfg with the disturbance removed.
ExperimentConfig without_disturbance(ExperimentConfig cfg);

}  // namespace imsmc
