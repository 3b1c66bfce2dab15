#pragma once

#include <filesystem>
#include <vector>

#include "polymor/loewner.hpp"
#include "polymor/ode.hpp"
#include "polymor/types.hpp"

namespace polymor {

struct CurOptions {
  enum class Selection { GreedyPivot, LeverageScore };
  Selection selection = Selection::GreedyPivot;
  unsigned seed = 0;        // LeverageScore sampling seed
  double pinv_tol = 1e-12;  // relative truncation of the pseudoinverses
};

struct CurSelection {
  std::vector<Index> cols, rows;
  MatX U;  // n_c x n_r, argmin |M - C U R|_F via pseudoinverses
};

// Pseudo-skeletal approximation M ≈ C U R from n_c columns and n_r rows.
CurSelection cur_decompose(const MatX& M, Index n_c, Index n_r, const CurOptions& opts = {});

// Cheap evaluator of one reduced Hadamard term:
//   coefficient · Psi · ((F_1 xhat) ∘ ... ∘ (F_xi xhat)),
// with Psi = W_effᵀ C U precomputed and F_j the projected factor rows at the
// CUR row indices.
struct CurHyperModel {
  int xi = 0;
  double coefficient = 1.0;
  std::vector<Index> row_indices;       // into 1..n of the full grid (0-based here)
  MatX Psi;                             // r x n_r
  std::vector<MatX> sampled_factor_rows;  // xi matrices, n_r x r

  VecX evaluate(const VecX& xhat) const;
  MatX jacobian(const VecX& xhat) const;
};

VecX hyper_rhs(const CurHyperModel& model, const VecX& xhat);

CurHyperModel build_hyper(const ReductionResult& result, const ProjectedTerm& term, Index n_c,
                          Index n_r, const CurOptions& opts = {});

// Reduced system whose Hadamard terms are evaluated through CUR models.
struct HyperReducedSystem {
  ReducedSystem base;  // H terms stripped
  std::vector<CurHyperModel> terms;

  VecX rhs(const VecX& x, const VecX& u) const;
  MatX jacobian(const VecX& x, const VecX& u) const;
};

// n_c/n_r <= 0 selects the default min(6r, r^xi).
HyperReducedSystem make_hyper_system(const ReductionResult& result, Index n_c, Index n_r,
                                     const CurOptions& opts = {});

Trajectory integrate(const HyperReducedSystem& sys, const InputSignal& u, double T,
                     const IntegrateOptions& opts = {});

void save_hyper(const std::filesystem::path& dir, const std::vector<CurHyperModel>& models);
std::vector<CurHyperModel> load_hyper(const std::filesystem::path& dir);

}  // namespace polymor
