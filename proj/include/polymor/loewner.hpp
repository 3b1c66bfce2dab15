#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "polymor/interpolation.hpp"
#include "polymor/system.hpp"
#include "polymor/types.hpp"

namespace polymor {

// Loewner data built by projection from raw (untrimmed) bases. Non-parametric
// pencils hold one L and one Ls block; affine-parametric pencils hold one
// block per E-term and per A-term in declaration order.
struct LoewnerPencil {
  std::vector<MatX> L_blocks;   // -WᵀE V (parametric: WᵀE^{(i)}V per term)
  std::vector<MatX> Ls_blocks;  // -WᵀA V (parametric: WᵀA^{(i)}V per term)
  VecX sv_row, sv_col;          // singular values of [L, Ls] and [L; Ls]
  MatX Y1;                      // left singular vectors of the row concatenation
  MatX X2;                      // right singular vectors of the vertical stack
};

LoewnerPencil build_pencil(const PolynomialSystem& sys, const MatX& V, const MatX& W);
LoewnerPencil build_pencil(const AffineParametricSystem& psys, const MatX& V, const MatX& W);

// Divided-difference construction from transfer data of a linear SISO system.
// Coincident left/right points are rejected.
std::pair<CMatX, CMatX> divided_difference_pencil(const CVecX& H_at_sigma, const CVecX& H_at_mu,
                                                  const std::vector<Complex>& sigma,
                                                  const std::vector<Complex>& mu);

struct OrderSelection {
  MatX Yr, Xr;
  int r = 0;
};

// Fixed order r, or the smallest r whose trailing relative singular values
// drop below tau in both SVDs.
OrderSelection select_order(const LoewnerPencil& pencil, std::optional<int> order,
                            double tau = 1e-8);

// Structure-preserving reduced system with dense storage.
struct ReducedSystem {
  Index r = 0, m = 0, q = 0;
  int d = 1;
  MatX E, A, B, C;
  std::map<int, MatX> H;  // r x r^xi
  std::map<int, MatX> N;  // r x (m·r^eta), input slice slowest
  bool e_singular = false;

  VecX rhs(const VecX& x, const VecX& u) const;
  MatX jacobian(const VecX& x, const VecX& u) const;

  PolynomialSystem to_polynomial() const;
  static ReducedSystem from_polynomial(const PolynomialSystem& sys);
};

ReducedSystem assemble_rom(const PolynomialSystem& sys, const MatX& V_eff, const MatX& W_eff);
// Parametric assembly keeps the affine structure: every term is projected by
// the same pair of bases, so the result is an affine family of dimension r.
AffineParametricSystem assemble_rom(const AffineParametricSystem& psys, const MatX& V_eff,
                                    const MatX& W_eff);

// Projected Hadamard factors A_j V_eff of every Hadamard term, used by the
// reduced row-Kronecker evaluator and CUR hyper-reduction.
struct ProjectedTerm {
  int xi = 0;
  double coefficient = 1.0;
  std::vector<MatX> factors;  // each n x r
};
std::vector<ProjectedTerm> projected_hadamard_terms(const PolynomialSystem& sys,
                                                    const MatX& V_eff);

struct StageTimings {
  double bases_ms = 0, pencil_ms = 0, select_ms = 0, assemble_ms = 0, total_ms = 0;
};

struct ReduceOptions {
  std::optional<int> order;
  double tau = 1e-8;
  bool one_sided = false;
  bool normalize_columns = true;  // unit column norms before the pencil
  double orth_tol = 1e-10;
};

struct ReductionResult {
  RawBases bases;  // realified raw bases as used for the pencil
  bool one_sided = false;
  LoewnerPencil pencil;
  int order = 0;
  MatX V_eff, W_eff;
  ReducedSystem rom;                           // non-parametric reduction
  std::optional<AffineParametricSystem> prom;  // parametric reduction (dimension r)
  std::vector<ProjectedTerm> hadamard_projection;
  StageTimings timings;
};

ReductionResult reduce(const PolynomialSystem& sys, const InterpolationSet& iset,
                       const ReduceOptions& opts = {});
ReductionResult reduce(const AffineParametricSystem& psys, const InterpolationSet& iset,
                       const ReduceOptions& opts = {});

}  // namespace polymor
