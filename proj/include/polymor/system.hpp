#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polymor/kron.hpp"
#include "polymor/types.hpp"

namespace polymor {

// One nonlinear term coefficient · (A_1 x ∘ ... ∘ A_xi x). The factors encode
// the tensor H(i1,i2,...,i_{xi+1}) = A_xi(i1,i2) · A_{xi-1}(i1,i3) · ... · A_1(i1,i_{xi+1}),
// whose mode-1 unfolding is the row-wise Kronecker product of the factors.
struct HadamardTerm {
  double coefficient = 1.0;
  std::vector<SpMat> factors;

  int degree() const { return static_cast<int>(factors.size()); }
  Index dim() const { return factors.empty() ? 0 : factors.front().rows(); }
  void validate() const;

  VecX evaluate(const VecX& x) const;
  CVecX evaluate(const CVecX& x) const;
};

// Degree-xi nonlinearity: a sum of Hadamard terms and/or an explicit sparse
// mode-1 unfolding n x n^xi. Hadamard storage is primary; the unfolding is
// only materialized on demand (see explicit_unfolding) or loaded from disk.
struct PolynomialNonlinearity {
  std::vector<HadamardTerm> terms;
  std::optional<UnfoldingMat> unfolding;

  bool has_hadamard() const { return !terms.empty(); }
  bool has_unfolding() const { return unfolding.has_value(); }
  bool empty() const { return !has_hadamard() && !has_unfolding(); }
};

// Mode-1 unfolding of a single Hadamard term, n x n^xi. Fails when n^xi
// exceeds column_cap.
UnfoldingMat explicit_unfolding(const HadamardTerm& term, std::int64_t column_cap = 1000000);

// Full-order polynomial system  E x' = A x + Σ_xi H_xi x^(⊗xi)
//                                      + Σ_eta N_eta (u ⊗ x^(⊗eta)) + B u,  y = C x.
// N_eta is stored n x (m·n^eta) with the input mode slowest, i.e. as the
// horizontal concatenation of per-input slices N^(j) of width n^eta.
struct PolynomialSystem {
  Index n = 0, m = 0, q = 0;
  int d = 1;
  SpMat E, A, B, C;
  std::map<int, PolynomialNonlinearity> H;  // keys in 2..d
  std::map<int, UnfoldingMat> N;            // keys in 1..d

  void validate(bool check_E_invertible = true) const;

  VecX rhs(const VecX& x, const VecX& u) const;
  SpMat jacobian(const VecX& x, const VecX& u) const;

  // Columns [j·n^eta, (j+1)·n^eta) of N_eta.
  UnfoldingMat input_slice(int eta, Index j) const;
};

// Tagged scalar coefficient of one affine term: the constant 1, a single
// parameter component, or a registered named callback.
struct CoefficientFn {
  enum class Kind { One, ParamComponent, Callback };
  Kind kind = Kind::One;
  int component = 0;
  std::string name;
  std::function<double(const VecX&)> fn;

  double operator()(const VecX& p) const;

  static CoefficientFn one();
  static CoefficientFn param(int component);
  static CoefficientFn callback(std::string name, std::function<double(const VecX&)> fn);
};

template <typename Matrix>
struct AffineTerm {
  CoefficientFn alpha;
  Matrix value;
};

struct AffineNonlinearTerm {
  CoefficientFn alpha;
  PolynomialNonlinearity value;
};

// Affine-parametric family: every matrix is a sum Σ_i α^(i)(p) · M^(i).
struct AffineParametricSystem {
  Index n = 0, m = 0, q = 0;
  int d = 1;
  Index np = 1;
  VecX box_lo, box_hi;

  std::vector<AffineTerm<SpMat>> E_terms, A_terms, B_terms, C_terms;
  std::map<int, std::vector<AffineNonlinearTerm>> H_terms;
  std::map<int, std::vector<AffineTerm<UnfoldingMat>>> N_terms;

  bool in_box(const VecX& p) const;
  // Warns (stderr) when p is outside the declared box; never fails for that.
  PolynomialSystem assemble_at(const VecX& p) const;
};

// Exact quadratic-bilinear reformulation of an elementwise-cubic system via
// the auxiliary state z = (D x) ∘ (D x) on the support of the common diagonal
// cubic factor D. Requires diagonal E, no N terms, and diagonal H_2 factors
// supported inside the cubic support; throws otherwise.
PolynomialSystem lift_cubic_to_qb(const PolynomialSystem& sys);

}  // namespace polymor
