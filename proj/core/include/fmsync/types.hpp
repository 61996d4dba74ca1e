#pragma once

#include <Eigen/Dense>

namespace fmsync {

/// Upper bound on the per-agent state dimensions p, q and the input width m.
inline constexpr int kMaxDim = 4;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Bounded-size types for the per-agent hot path (no heap allocation).
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using SmallRow = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

}  // namespace fmsync
