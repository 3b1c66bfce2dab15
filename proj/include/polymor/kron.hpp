#pragma once

#include <vector>

#include "polymor/types.hpp"

namespace polymor {

// v ⊗ v ⊗ ... ⊗ v (xi factors). The rightmost factor varies fastest, so
// result[(i1-1)·n^{xi-1} + ... + i_xi] = v[i1]·...·v[i_xi] in 1-based terms.
VecX kron_pow(const VecX& v, int xi);
CVecX kron_pow(const CVecX& v, int xi);

// Plain Kronecker product of two dense matrices (leftmost factor slowest).
MatX kron(const MatX& a, const MatX& b);
CMatX kron(const CMatX& a, const CMatX& b);

// Row-wise Kronecker (face-splitting) product: row i of the result is
// factors[0].row(i) ⊗ ... ⊗ factors.back().row(i). All factors must share
// their row count. A single factor is returned unchanged.
MatX row_kron(const std::vector<MatX>& factors);
CMatX row_kron(const std::vector<CMatX>& factors);
inline MatX row_kron(std::initializer_list<MatX> factors) {
  return row_kron(std::vector<MatX>(factors));
}
inline CMatX row_kron(std::initializer_list<CMatX> factors) {
  return row_kron(std::vector<CMatX>(factors));
}

// A mode-n matricization together with the tensor shape it came from.
struct ModeUnfolding {
  UnfoldingMat data;
  std::vector<Index> dims;  // tensor mode sizes, mode 1 first
  int mode = 1;             // 1-based index of the unfolded mode

  void validate() const;  // throws on inconsistent shapes
};

// Re-index a mode-1 unfolding into the mode-2 unfolding of the same tensor
// (and back). Pure index permutation, O(nnz).
ModeUnfolding mode2_from_mode1(const ModeUnfolding& m1);
ModeUnfolding mode1_from_mode2(const ModeUnfolding& m2);

// M · (factors[0] ⊗ factors[1] ⊗ ... ⊗ factors.back()) without materializing
// the Kronecker product. M's columns follow the unfolding convention: the
// leftmost factor is the slowest column digit. slot_dims[k] gives the row
// count expected of factors[k]; their product must equal M.cols().
MatX kron_contract(const UnfoldingMat& M, const std::vector<Index>& slot_dims,
                   const std::vector<MatX>& factors);
CMatX kron_contract(const UnfoldingMat& M, const std::vector<Index>& slot_dims,
                    const std::vector<CMatX>& factors);

// M · (a_N ⊗ ... ⊗ a_2) for a mode-1 unfolding of an N-way tensor; the
// vectors are supplied in mode order a_2, ..., a_N.
VecX contract_vectors(const ModeUnfolding& m1, const std::vector<VecX>& vecs);
CVecX contract_vectors(const ModeUnfolding& m1, const std::vector<CVecX>& vecs);
inline VecX contract_vectors(const ModeUnfolding& m1, std::initializer_list<VecX> vecs) {
  return contract_vectors(m1, std::vector<VecX>(vecs));
}
inline CVecX contract_vectors(const ModeUnfolding& m1, std::initializer_list<CVecX> vecs) {
  return contract_vectors(m1, std::vector<CVecX>(vecs));
}

// Real-sparse times complex-dense products (Eigen does not mix scalar types).
CMatX spmul(const SpMat& A, const CMatX& X);
CMatX spmul_transpose(const SpMat& A, const CMatX& X);  // Aᵀ · X, no conjugation

}  // namespace polymor
