#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <limits>

namespace conic_bnb {

using Scalar = double;
using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline bool is_finite(double v) { return std::isfinite(v); }

} // namespace conic_bnb
