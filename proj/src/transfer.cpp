#include "polymor/transfer.hpp"

#include <sstream>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "polymor/kron.hpp"

namespace polymor {

struct PhiFactorization::Impl {
  CSpMat pencil;
  Eigen::SparseLU<CSpMat> lu;
};

PhiFactorization::PhiFactorization(const SpMat& E, const SpMat& A, Complex s)
    : impl_(std::make_unique<Impl>()) {
  impl_->pencil = (s * E.cast<Complex>() - A.cast<Complex>()).pruned();
  impl_->lu.compute(impl_->pencil);
  if (impl_->lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "singular pencil: sE - A is not invertible at s = " << s.real();
    if (s.imag() != 0.0) msg << (s.imag() < 0 ? " - " : " + ") << std::abs(s.imag()) << "i";
    throw std::runtime_error(msg.str());
  }
}

PhiFactorization::~PhiFactorization() = default;
PhiFactorization::PhiFactorization(PhiFactorization&&) noexcept = default;

CMatX PhiFactorization::solve(const CMatX& rhs) const { return impl_->lu.solve(rhs); }

CMatX PhiFactorization::solve_transpose(const CMatX& rhs) const {
  return impl_->lu.transpose().solve(rhs);
}

PhiCache::PhiCache(const PolynomialSystem& sys, std::size_t budget)
    : sys_(&sys), budget_(budget == 0 ? 1 : budget) {}

std::shared_ptr<const PhiFactorization> PhiCache::at(Complex s) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto it = lru_.begin(); it != lru_.end(); ++it) {
    if (it->first == s) {
      lru_.splice(lru_.begin(), lru_, it);
      return lru_.front().second;
    }
  }
  auto fact = std::make_shared<const PhiFactorization>(sys_->E, sys_->A, s);
  lru_.emplace_front(s, fact);
  if (lru_.size() > budget_) lru_.pop_back();
  return fact;
}

CMatX phi_solve(PhiCache& cache, Complex s, const CMatX& rhs) {
  return cache.at(s)->solve(rhs);
}

CMatX eval_FL(PhiCache& cache, Complex s1) {
  const auto& sys = cache.system();
  const CMatX phiB = cache.at(s1)->solve(sys.B.cast<Complex>());
  return spmul(sys.C, phiB);
}

namespace {

// H_xi (G_xi ⊗ ... ⊗ G_1) where G_j = Φ(s_j)B, contracted without forming
// the Kronecker product. Returns an n x m^xi matrix.
CMatX apply_H(const PolynomialSystem& sys, int xi, const std::vector<CMatX>& G) {
  const auto it = sys.H.find(xi);
  if (it == sys.H.end() || it->second.empty())
    throw std::invalid_argument("eval_FH: H_" + std::to_string(xi) + " not present");
  const auto& nl = it->second;
  Index cols = 1;
  for (int k = 0; k < xi; ++k) cols *= sys.m;
  CMatX acc = CMatX::Zero(sys.n, cols);
  if (nl.has_hadamard()) {
    for (const auto& t : nl.terms) {
      std::vector<CMatX> fac(xi);
      for (int l = 0; l < xi; ++l) fac[l] = spmul(t.factors[l], G[xi - 1 - l]);
      acc += t.coefficient * row_kron(fac);
    }
  } else {
    std::vector<Index> slots(xi, sys.n);
    std::vector<CMatX> fac(G.rbegin(), G.rend());  // slowest slot is G_xi
    acc = kron_contract(*nl.unfolding, slots, fac);
  }
  return acc;
}

}  // namespace

CMatX eval_FH(PhiCache& cache, int xi, std::span<const Complex> s) {
  const auto& sys = cache.system();
  if (static_cast<int>(s.size()) != xi + 1)
    throw std::invalid_argument("eval_FH: need xi+1 frequency points");
  std::vector<CMatX> G(xi);
  const CMatX Bc = sys.B.cast<Complex>();
  for (int j = 0; j < xi; ++j) G[j] = cache.at(s[j])->solve(Bc);
  const CMatX inner = apply_H(sys, xi, G);
  const CMatX solved = cache.at(s[xi])->solve(inner);
  return spmul(sys.C, solved);
}

CMatX eval_FN(PhiCache& cache, int eta, std::span<const Complex> s) {
  const auto& sys = cache.system();
  if (static_cast<int>(s.size()) != eta + 1)
    throw std::invalid_argument("eval_FN: need eta+1 frequency points");
  if (!sys.N.count(eta))
    throw std::invalid_argument("eval_FN: N_" + std::to_string(eta) + " not present");
  std::vector<CMatX> G(eta);
  const CMatX Bc = sys.B.cast<Complex>();
  for (int j = 0; j < eta; ++j) G[j] = cache.at(s[j])->solve(Bc);

  Index mcols = 1;
  for (int k = 0; k < eta; ++k) mcols *= sys.m;
  CMatX inner(sys.n, sys.m * mcols);
  std::vector<Index> slots(eta, sys.n);
  std::vector<CMatX> fac(G.rbegin(), G.rend());
  for (Index j = 0; j < sys.m; ++j) {
    const UnfoldingMat slice = sys.input_slice(eta, j);
    inner.middleCols(j * mcols, mcols) = kron_contract(slice, slots, fac);
  }
  const CMatX solved = cache.at(s[eta])->solve(inner);
  return spmul(sys.C, solved);
}

CMatX eval_FL(const PolynomialSystem& sys, Complex s1) {
  PhiCache cache(sys);
  return eval_FL(cache, s1);
}
CMatX eval_FH(const PolynomialSystem& sys, int xi, std::span<const Complex> s) {
  PhiCache cache(sys);
  return eval_FH(cache, xi, s);
}
CMatX eval_FN(const PolynomialSystem& sys, int eta, std::span<const Complex> s) {
  PhiCache cache(sys);
  return eval_FN(cache, eta, s);
}

ParametricEvaluator::ParametricEvaluator(const AffineParametricSystem& psys, std::size_t budget)
    : psys_(&psys), budget_(budget == 0 ? 1 : budget) {}

PhiCache& ParametricEvaluator::cache_at(const VecX& p) {
  for (auto it = lru_.begin(); it != lru_.end(); ++it) {
    if (it->p.size() == p.size() && it->p == p) {
      lru_.splice(lru_.begin(), lru_, it);
      return *lru_.front().cache;
    }
  }
  Entry e;
  e.p = p;
  e.sys = std::make_unique<PolynomialSystem>(psys_->assemble_at(p));
  e.cache = std::make_unique<PhiCache>(*e.sys);
  lru_.push_front(std::move(e));
  if (lru_.size() > budget_) lru_.pop_back();
  return *lru_.front().cache;
}

CMatX ParametricEvaluator::eval_FL(Complex s1, const VecX& p) {
  return polymor::eval_FL(cache_at(p), s1);
}
CMatX ParametricEvaluator::eval_FH(int xi, std::span<const Complex> s, const VecX& p) {
  return polymor::eval_FH(cache_at(p), xi, s);
}
CMatX ParametricEvaluator::eval_FN(int eta, std::span<const Complex> s, const VecX& p) {
  return polymor::eval_FN(cache_at(p), eta, s);
}

}  // namespace polymor
