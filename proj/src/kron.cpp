#include "polymor/kron.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace polymor {

namespace {

template <typename Vec>
Vec kron_pow_impl(const Vec& v, int xi) {
  if (xi < 1) throw std::invalid_argument("kron_pow: degree must be >= 1");
  Vec out = v;
  for (int k = 1; k < xi; ++k) {
    Vec next(out.size() * v.size());
    for (Index i = 0; i < out.size(); ++i)
      next.segment(i * v.size(), v.size()) = out[i] * v;
    out.swap(next);
  }
  return out;
}

template <typename Mat>
Mat kron_impl(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Mat>
Mat row_kron_impl(const std::vector<Mat>& factors) {
  if (factors.empty()) throw std::invalid_argument("row_kron: no factors");
  const Index n = factors.front().rows();
  Index cols = 1;
  for (const auto& f : factors) {
    if (f.rows() != n) throw std::invalid_argument("row_kron: row counts differ");
    cols *= f.cols();
  }
  if (factors.size() == 1) return factors.front();

  const std::size_t k = factors.size();
  std::vector<Index> stride(k);
  stride[k - 1] = 1;
  for (std::size_t j = k - 1; j > 0; --j) stride[j - 1] = stride[j] * factors[j].cols();

  Mat out(n, cols);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < cols; ++c) {
      typename Mat::Scalar prod = factors[0](i, (c / stride[0]) % factors[0].cols());
      for (std::size_t j = 1; j < k; ++j)
        prod *= factors[j](i, (c / stride[j]) % factors[j].cols());
      out(i, c) = prod;
    }
  }
  return out;
}

std::vector<std::int64_t> column_strides(const std::vector<Index>& slot_dims) {
  std::vector<std::int64_t> stride(slot_dims.size());
  std::int64_t s = 1;
  for (std::size_t j = slot_dims.size(); j-- > 0;) {
    stride[j] = s;
    s *= slot_dims[j];
  }
  return stride;
}

template <typename Mat>
Mat kron_contract_impl(const UnfoldingMat& M, const std::vector<Index>& slot_dims,
                       const std::vector<Mat>& factors) {
  if (slot_dims.size() != factors.size())
    throw std::invalid_argument("kron_contract: slot/factor count mismatch");
  std::int64_t total = 1;
  Index out_cols = 1;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].rows() != slot_dims[j])
      throw std::invalid_argument("kron_contract: factor " + std::to_string(j) +
                                  " has wrong row count");
    total *= slot_dims[j];
    out_cols *= factors[j].cols();
  }
  if (total != M.cols()) throw std::invalid_argument("kron_contract: column count mismatch");

  const auto stride = column_strides(slot_dims);
  std::vector<Index> out_stride(factors.size());
  {
    Index s = 1;
    for (std::size_t j = factors.size(); j-- > 0;) {
      out_stride[j] = s;
      s *= factors[j].cols();
    }
  }

  Mat out = Mat::Zero(M.rows(), out_cols);
  std::vector<Index> digit(factors.size());
  for (Index i = 0; i < M.rows(); ++i) {
    for (UnfoldingMat::InnerIterator it(M, i); it; ++it) {
      const std::int64_t c = it.index();
      for (std::size_t j = 0; j < factors.size(); ++j)
        digit[j] = static_cast<Index>((c / stride[j]) % slot_dims[j]);
      for (Index oc = 0; oc < out_cols; ++oc) {
        typename Mat::Scalar prod = it.value();
        for (std::size_t j = 0; j < factors.size(); ++j)
          prod *= factors[j](digit[j], (oc / out_stride[j]) % factors[j].cols());
        out(i, oc) += prod;
      }
    }
  }
  return out;
}

}  // namespace

MatX kron_contract(const UnfoldingMat& M, const std::vector<Index>& slot_dims,
                   const std::vector<MatX>& factors) {
  return kron_contract_impl(M, slot_dims, factors);
}
CMatX kron_contract(const UnfoldingMat& M, const std::vector<Index>& slot_dims,
                    const std::vector<CMatX>& factors) {
  return kron_contract_impl(M, slot_dims, factors);
}

VecX kron_pow(const VecX& v, int xi) { return kron_pow_impl(v, xi); }
CVecX kron_pow(const CVecX& v, int xi) { return kron_pow_impl(v, xi); }

MatX kron(const MatX& a, const MatX& b) { return kron_impl(a, b); }
CMatX kron(const CMatX& a, const CMatX& b) { return kron_impl(a, b); }

MatX row_kron(const std::vector<MatX>& factors) { return row_kron_impl(factors); }
CMatX row_kron(const std::vector<CMatX>& factors) { return row_kron_impl(factors); }

void ModeUnfolding::validate() const {
  if (mode < 1 || static_cast<std::size_t>(mode) > dims.size())
    throw std::invalid_argument("ModeUnfolding: mode out of range");
  std::int64_t rest = 1;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    if (dims[j] < 1) throw std::invalid_argument("ModeUnfolding: nonpositive dim");
    if (j + 1 != static_cast<std::size_t>(mode)) rest *= dims[j];
  }
  if (data.rows() != dims[mode - 1] || data.cols() != rest)
    throw std::invalid_argument("ModeUnfolding: shape inconsistent with dims");
}

namespace {

// Column strides of a mode-n unfolding per the matricization definition:
// j = 1 + sum_{k != n} (i_k - 1) J_k with J_k = prod_{m < k, m != n} n_m.
std::vector<std::int64_t> unfolding_strides(const std::vector<Index>& dims, int mode) {
  std::vector<std::int64_t> J(dims.size(), 0);
  std::int64_t acc = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k + 1 == static_cast<std::size_t>(mode)) continue;
    J[k] = acc;
    acc *= dims[k];
  }
  return J;
}

ModeUnfolding permute_unfolding(const ModeUnfolding& in, int target_mode) {
  in.validate();
  const auto& dims = in.dims;
  const auto Jin = unfolding_strides(dims, in.mode);
  const auto Jout = unfolding_strides(dims, target_mode);

  std::int64_t out_cols = 1;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (k + 1 != static_cast<std::size_t>(target_mode)) out_cols *= dims[k];

  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  trip.reserve(static_cast<std::size_t>(in.data.nonZeros()));
  std::vector<std::int64_t> idx(dims.size());
  for (Index i = 0; i < in.data.rows(); ++i) {
    for (UnfoldingMat::InnerIterator it(in.data, i); it; ++it) {
      // Decode the full multi-index of this entry.
      std::int64_t c = it.index();
      for (std::size_t k = dims.size(); k-- > 0;) {
        if (k + 1 == static_cast<std::size_t>(in.mode)) {
          idx[k] = i;
        } else {
          idx[k] = (c / Jin[k]) % dims[k];
        }
      }
      std::int64_t oc = 0;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (k + 1 != static_cast<std::size_t>(target_mode)) oc += idx[k] * Jout[k];
      trip.emplace_back(idx[target_mode - 1], oc, it.value());
    }
  }

  ModeUnfolding out;
  out.dims = dims;
  out.mode = target_mode;
  out.data.resize(dims[target_mode - 1], out_cols);
  out.data.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

ModeUnfolding mode2_from_mode1(const ModeUnfolding& m1) {
  if (m1.mode != 1) throw std::invalid_argument("mode2_from_mode1: input must be mode-1");
  return permute_unfolding(m1, 2);
}

ModeUnfolding mode1_from_mode2(const ModeUnfolding& m2) {
  if (m2.mode != 2) throw std::invalid_argument("mode1_from_mode2: input must be mode-2");
  return permute_unfolding(m2, 1);
}

namespace {

template <typename Vec, typename Mat>
Vec contract_vectors_impl(const ModeUnfolding& m1, const std::vector<Vec>& vecs) {
  m1.validate();
  if (m1.mode != 1) throw std::invalid_argument("contract_vectors: input must be mode-1");
  if (vecs.size() + 1 != m1.dims.size())
    throw std::invalid_argument("contract_vectors: need one vector per mode 2..N");
  // Slots of a mode-1 unfolding run slowest-first as a_N, ..., a_2.
  std::vector<Index> slot_dims(vecs.size());
  std::vector<Mat> factors(vecs.size());
  for (std::size_t j = 0; j < vecs.size(); ++j) {
    const std::size_t mode_idx = m1.dims.size() - 1 - j;  // modes N..2
    slot_dims[j] = m1.dims[mode_idx];
    if (vecs[mode_idx - 1].size() != slot_dims[j])
      throw std::invalid_argument("contract_vectors: vector length mismatch at mode " +
                                  std::to_string(mode_idx + 1));
    factors[j] = vecs[mode_idx - 1];
  }
  return kron_contract(m1.data, slot_dims, factors).col(0);
}

}  // namespace

VecX contract_vectors(const ModeUnfolding& m1, const std::vector<VecX>& vecs) {
  return contract_vectors_impl<VecX, MatX>(m1, vecs);
}
CVecX contract_vectors(const ModeUnfolding& m1, const std::vector<CVecX>& vecs) {
  return contract_vectors_impl<CVecX, CMatX>(m1, vecs);
}

CMatX spmul(const SpMat& A, const CMatX& X) {
  MatX yr = A * X.real().eval();
  MatX yi = A * X.imag().eval();
  CMatX out(yr.rows(), yr.cols());
  out.real() = yr;
  out.imag() = yi;
  return out;
}

CMatX spmul_transpose(const SpMat& A, const CMatX& X) {
  MatX yr = A.transpose() * X.real().eval();
  MatX yi = A.transpose() * X.imag().eval();
  CMatX out(yr.rows(), yr.cols());
  out.real() = yr;
  out.imag() = yi;
  return out;
}

}  // namespace polymor
