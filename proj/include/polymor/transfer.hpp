#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "polymor/system.hpp"
#include "polymor/types.hpp"

namespace polymor {

// Sparse LU of (sE - A) with plain and transposed solves. Throws a
// singular-pencil error naming s when the factorization fails.
class PhiFactorization {
 public:
  PhiFactorization(const SpMat& E, const SpMat& A, Complex s);
  ~PhiFactorization();
  PhiFactorization(PhiFactorization&&) noexcept;

  CMatX solve(const CMatX& rhs) const;            // (sE - A)^{-1} rhs
  CMatX solve_transpose(const CMatX& rhs) const;  // (sE - A)^{-T} rhs, no conjugation

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// LRU cache of pencil factorizations keyed by the frequency point. Shared
// mutable state is guarded internally so evaluations at distinct points may
// run concurrently.
class PhiCache {
 public:
  explicit PhiCache(const PolynomialSystem& sys, std::size_t budget = 32);

  std::shared_ptr<const PhiFactorization> at(Complex s);
  const PolynomialSystem& system() const { return *sys_; }

 private:
  const PolynomialSystem* sys_;
  std::size_t budget_;
  std::mutex mutex_;
  std::list<std::pair<Complex, std::shared_ptr<const PhiFactorization>>> lru_;
};

// (sE - A)^{-1} rhs through the cache.
CMatX phi_solve(PhiCache& cache, Complex s, const CMatX& rhs);

// Leading generalized transfer functions. Frequency tuples are passed with
// s[0] = s_1 (rightmost Kronecker factor) and s.back() the output-side solve.
CMatX eval_FL(PhiCache& cache, Complex s1);                          // C Φ(s1) B
CMatX eval_FH(PhiCache& cache, int xi, std::span<const Complex> s);  // q x m^xi
CMatX eval_FN(PhiCache& cache, int eta, std::span<const Complex> s); // q x m^{eta+1}

// Convenience one-shot overloads.
CMatX eval_FL(const PolynomialSystem& sys, Complex s1);
CMatX eval_FH(const PolynomialSystem& sys, int xi, std::span<const Complex> s);
CMatX eval_FN(const PolynomialSystem& sys, int eta, std::span<const Complex> s);

// Parametric dispatch: assembles the system at p (cached per distinct p) and
// evaluates the non-parametric kernels; factorization caches are keyed (s, p).
class ParametricEvaluator {
 public:
  explicit ParametricEvaluator(const AffineParametricSystem& psys, std::size_t budget = 8);

  PhiCache& cache_at(const VecX& p);
  CMatX eval_FL(Complex s1, const VecX& p);
  CMatX eval_FH(int xi, std::span<const Complex> s, const VecX& p);
  CMatX eval_FN(int eta, std::span<const Complex> s, const VecX& p);

 private:
  struct Entry {
    VecX p;
    std::unique_ptr<PolynomialSystem> sys;
    std::unique_ptr<PhiCache> cache;
  };
  const AffineParametricSystem* psys_;
  std::size_t budget_;
  std::list<Entry> lru_;
};

}  // namespace polymor
