#include "imsmc/reaching.hpp"

#include <stdexcept>

namespace imsmc {

void ReachingParams::validate() const {
    if (!(mu0 > 0.0 && mu0 < 1.0)) {
        throw std::invalid_argument("mu0 must lie in (0, 1)");
    }
    if (!(xi_t > 0.0)) {
        throw std::invalid_argument("xi_t must be positive");
    }
    if (!(delta_bar >= 0.0)) {
        throw std::invalid_argument("delta_bar must be non-negative");
    }
}

Vector sgn(const Vector& v) {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        out(i) = v(i) > 0.0 ? 1.0 : -1.0;
    }
    return out;
}

std::string to_string(CompensatorMode mode) {
    switch (mode) {
        case CompensatorMode::one_step:
            return "one_step";
        case CompensatorMode::literal_sum:
            return "literal_sum";
        case CompensatorMode::none:
            return "none";
    }
    return "one_step";
}

CompensatorMode compensator_mode_from_string(const std::string& name) {
    if (name == "one_step") return CompensatorMode::one_step;
    if (name == "literal_sum") return CompensatorMode::literal_sum;
    if (name == "none") return CompensatorMode::none;
    throw std::invalid_argument("unknown compensator mode '" + name + "' (one_step | literal_sum | none)");
}

CompensatorState make_compensator(Index nu, CompensatorMode mode, double mu0_init) {
    CompensatorState c;
    c.mode = mode;
    c.mu0_prev = mu0_init;
    c.varpi_hat = Vector::Zero(nu);
    c.last_increment = Vector::Zero(nu);
    return c;
}

Vector reaching_deviation(const Vector& s_now, const Vector& s_prev, double mu0_prev, double xi_t) {
    return s_now - ((1.0 - mu0_prev) * s_prev - xi_t * sgn(s_prev));
}

CompensatorState update_compensator(CompensatorState c, const Vector& s_now, double xi_t) {
    const Vector before = c.varpi_hat;
    ++c.samples;
    switch (c.mode) {
        case CompensatorMode::none:
            break;
        case CompensatorMode::one_step:
            if (c.samples >= 3) {
                c.varpi_hat += reaching_deviation(s_now, *c.s_prev, c.mu0_prev, xi_t);
            }
            break;
        case CompensatorMode::literal_sum: {
            c.s_history.push_back(s_now);
            // samples counts s(0) .. s(k); the sum runs over i = 2 .. k.
            const long k = c.samples - 1;
            Vector sum = Vector::Zero(s_now.size());
            if (k >= 2) {
                const Vector frozen_sign = xi_t * sgn(s_now);
                for (long i = 2; i <= k; ++i) {
                    const auto& si = c.s_history[static_cast<std::size_t>(i)];
                    const auto& sp = c.s_history[static_cast<std::size_t>(i - 1)];
                    sum += si - ((1.0 - c.mu0_prev) * sp - frozen_sign);
                }
            }
            c.varpi_hat = sum;
            break;
        }
    }
    c.last_increment = c.varpi_hat - before;
    c.s_prev = s_now;
    return c;
}

Vector reaching_bracket(const Vector& s, const Vector& g_bar_a_x, const Vector& varpi_hat, double mu0,
                        double xi_t) {
    Vector bracket = mu0 * s;
    bracket += xi_t * sgn(s);
    bracket += g_bar_a_x;
    bracket -= s;
    bracket += varpi_hat;
    return bracket;
}

Vector robust_smc_control(const RegularForm& rf, const SurfaceGain& g, const Vector& x,
                          const CompensatorState& c, const ReachingParams& params) {
    const Vector s = g.sliding(x);
    const Matrix gb = g.g_bar() * rf.b;
    const Vector bracket = reaching_bracket(s, g.g_bar() * (rf.a * x), c.varpi_hat, params.mu0, params.xi_t);
    return -gb.partialPivLu().solve(bracket);
}

}  // namespace imsmc
