#pragma once

#include <Eigen/Dense>

namespace imsmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Discrete time index k.
using StepIndex = long;

}  // namespace imsmc
