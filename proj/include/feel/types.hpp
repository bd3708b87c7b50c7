#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

namespace feel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXd;

/// Marker for "cannot complete" durations (zero-rate uploads and the like).
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

} // namespace feel
