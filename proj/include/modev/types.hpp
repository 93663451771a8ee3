#pragma once

#include <Eigen/Dense>

#include <limits>

namespace modev {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vec>;
using ConstVecRef = Eigen::Ref<const Vec>;
using ConstMatRef = Eigen::Ref<const Mat>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace modev
