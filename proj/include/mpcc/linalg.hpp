#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mpcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

} // namespace mpcc
