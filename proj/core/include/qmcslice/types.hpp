#pragma once

#include <Eigen/Core>

namespace qmcslice {

// Point sets and direction sets are stored one point per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace qmcslice
