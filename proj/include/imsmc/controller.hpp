#pragma once

#include <memory>

#include "imsmc/input_mapping.hpp"

namespace imsmc {

// Everything a controller decided at step k.
struct ControlStep {
    Vector u;
    Vector s;
    Vector l;
    Matrix g_next;
    double mu0 = 0.0;
    Vector varpi_hat;
    Vector varpi_increment;
    double residual_norm = 0.0;
    double omega = 0.0;
    bool in_band = false;
    bool clamped = false;
    bool fallback = false;
    Vector delta_x;
    Vector delta_u;
};

class Controller {
  public:
    virtual ~Controller() = default;
    virtual ControlStep step(const Vector& x) = 0;
};

// Static-G disturbance-compensated SMC.
class RobustController : public Controller {
  public:
    RobustController(RegularForm rf, SurfaceGain g, ReachingParams params, CompensatorMode mode);

    ControlStep step(const Vector& x) override;

  private:
    RegularForm rf_;
    SurfaceGain g_;
    ReachingParams params_;
    CompensatorState comp_;
    QsmbBand band_;
};

struct ImsmcParams {
    Index window = 2;
    double xi_t = 0.01;
    double delta_bar = 0.005;
    double mu0_init = 0.1;
    Matrix g_init;
    CompensatorMode mode = CompensatorMode::one_step;
    CoDesignOptions solve{};
};

// Input-mapping co-design controller. State (history, compensator, surface,
// running band) advances strictly sequentially, one call per step.
class ImsmcController : public Controller {
  public:
    ImsmcController(RegularForm rf, ImsmcParams params);

    ControlStep step(const Vector& x) override;

    const Matrix& current_gain() const { return g_current_; }
    const HistoryBuffer& history() const { return history_; }

  private:
    RegularForm rf_;
    ImsmcParams params_;
    HistoryBuffer history_;
    CompensatorState comp_;
    Matrix g_current_;
    double mu0_prev_;
    double mu0_sup_;
};

}  // namespace imsmc
