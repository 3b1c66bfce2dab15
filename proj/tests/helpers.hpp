#pragma once

#include <random>
#include <vector>

#include <polymor/types.hpp>

// Test-only oracles, independent of the library implementations they check.
namespace oracle {

using polymor::Index;
using polymor::MatX;
using polymor::SpMat;
using polymor::VecX;

inline MatX dense_kron(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline MatX dense_kron(const std::vector<MatX>& ms) {
  MatX out = ms.front();
  for (std::size_t k = 1; k < ms.size(); ++k) out = dense_kron(out, ms[k]);
  return out;
}

inline MatX random_dense(Index rows, Index cols, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  MatX M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = dist(rng);
  return M;
}

inline VecX random_vec(Index n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  VecX v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline SpMat random_sparse(Index rows, Index cols, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> dist;
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (coin(rng) < density) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), dist(rng));
  SpMat M(rows, cols);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

// Stable sparse A: random off-diagonal entries made strictly diagonally
// dominant with a negative diagonal.
inline SpMat random_stable_sparse(Index n, double density, std::mt19937& rng) {
  SpMat R = random_sparse(n, n, density, rng);
  VecX rowsum = VecX::Zero(n);
  for (Index col = 0; col < R.outerSize(); ++col)
    for (SpMat::InnerIterator it(R, col); it; ++it) rowsum[it.row()] += std::abs(it.value());
  SpMat D(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < n; ++i)
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -(rowsum[i] + 1.0));
  D.setFromTriplets(trip.begin(), trip.end());
  return SpMat(R + D);
}

}  // namespace oracle
