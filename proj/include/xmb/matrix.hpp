#pragma once

#include <Eigen/Dense>

namespace xmb {

// All numerical work uses row-major double matrices: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace xmb
