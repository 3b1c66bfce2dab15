#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace polymor {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CVecX = Eigen::VectorXcd;
using CMatX = Eigen::MatrixXcd;

using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<Complex>;

// Wide unfoldings (n x n^xi) are stored row-major with 64-bit inner indices:
// the outer array stays at n+1 entries and column ids may exceed 2^31.
using UnfoldingMat = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

}  // namespace polymor
