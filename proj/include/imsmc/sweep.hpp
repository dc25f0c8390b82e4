#pragma once

#include <string>
#include <vector>

#include "imsmc/experiment.hpp"

namespace imsmc {

struct SweepPoint {
    std::string value;  // the literal as given
    ExperimentConfig config;
    TrajectoryLog log;
    Metrics metrics;
    std::string error;  // non-empty when the run failed
};

// `param` is "section.key" (or a bare key looked up across sections). Each
// value is a config literal. Configs are all built and validated first, runs
// then execute concurrently and come back in input order.
std::vector<SweepPoint> run_sweep(const ConfigDocument& base, const std::string& param,
                                  const std::vector<std::string>& values);

// Splits "a,b,[1,2]" on top-level commas.
std::vector<std::string> split_values(const std::string& list);

}  // namespace imsmc
