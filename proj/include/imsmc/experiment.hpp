#pragma once

#include <vector>

#include "imsmc/config.hpp"

namespace imsmc {

// One logged step. x is in regular-form coordinates; y = C x when an output
// map is configured.
struct LogRow {
    StepIndex k = 0;
    Vector x;
    Vector u;
    Vector s;
    double s_norm = 0.0;
    Vector l;
    Matrix g_next;
    double mu0 = 0.0;
    Vector varpi_hat;
    double residual_norm = 0.0;
    double omega = 0.0;
    bool in_band = false;
    bool clamped = false;
    bool fallback = false;
    Vector delta_x;
    Vector delta_u;
    Vector y;
};

struct TrajectoryLog {
    Index nx = 0;
    Index nu = 0;
    Index window = 0;
    Index ny = 0;
    std::vector<LogRow> rows;

    Index n1() const { return nx - nu; }
    std::size_t size() const { return rows.size(); }
};

// The sliding gain the run starts from: the configured one, else the LMI design.
Matrix initial_gain(const ExperimentConfig& cfg, const RegularForm& rf);

// Runs the configured closed loop for cfg.horizon steps. A controller
// exception at some step is logged as a fallback row with u = 0.
TrajectoryLog run_experiment(const ExperimentConfig& cfg);

struct Metrics {
    long settling_time = 0;
    long band_entry_time = 0;
    double max_band_violation = 0.0;
    double chattering_index = 0.0;
    double delta_hat = 0.0;
    // ‖y(K-1) - y_d‖∞, zero without an output map.
    double final_tracking_error = 0.0;
};

// Settling: smallest K with ‖x(k)‖∞ ≤ ε on [K, K + hold] (clipped to the log);
// horizon + 1 when never settled. Band entry uses the same sentinel.
Metrics compute_metrics(const TrajectoryLog& log, const ExperimentConfig& cfg);

}  // namespace imsmc
