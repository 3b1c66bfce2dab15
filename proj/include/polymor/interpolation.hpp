#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "polymor/system.hpp"
#include "polymor/transfer.hpp"
#include "polymor/types.hpp"

namespace polymor {

// Frequency/parameter interpolation data. Complex points must come in
// conjugate pairs so the assembled bases can be kept real.
struct InterpolationSet {
  enum class Mode { SisoGeneral, Tangential, ParametricTangential };

  Mode mode = Mode::Tangential;
  std::vector<Complex> sigma;
  std::vector<Complex> mu;  // left points, SisoGeneral only
  std::vector<CVecX> b;     // right tangential directions (length m)
  std::vector<CVecX> c;     // left tangential directions (length q)
  std::vector<VecX> p;      // parameter points, parametric mode only

  // Enumerate all cross-frequency tuples of the general theorem instead of
  // the diagonal default. Column counts grow combinatorially; a warning with
  // the count is emitted.
  bool full_tuples = false;

  void validate(Index m_inputs, Index q_outputs, Index np) const;
};

std::vector<Complex> log_spaced_frequencies(double lo, double hi, int count);
std::vector<VecX> uniform_parameter_points(const VecX& lo, const VecX& hi, int count,
                                           unsigned seed);

InterpolationSet load_interpolation_csv(const std::filesystem::path& path);

// Default directions: leading singular vectors of F_L at each point (SISO: 1).
void fill_default_directions(InterpolationSet& iset, const PolynomialSystem& sys);
void fill_default_directions(InterpolationSet& iset, const AffineParametricSystem& psys);

struct ColumnProvenance {
  char block = 'L';   // 'L', 'N', or 'H'
  int degree = 1;     // eta or xi (1 for the linear block)
  int point = 0;      // index into sigma (and mu/p where applicable)
  int slice = 0;      // input slice for N blocks
  char part = 'c';    // 'c' real column, 'r'/'i' realified pair
};

struct RawBases {
  MatX V, W;
  std::vector<ColumnProvenance> v_cols, w_cols;
};

RawBases build_bases_tangential(const PolynomialSystem& sys, const InterpolationSet& iset);
RawBases build_bases_siso_general(const PolynomialSystem& sys, const InterpolationSet& iset);
RawBases build_bases_parametric(const AffineParametricSystem& psys,
                                const InterpolationSet& iset);

// Orthonormal basis of the numerical column space; singular directions below
// tol · sigma_max are dropped. Throws on an all-zero input.
MatX orth_trim(const MatX& M, double tol = 1e-10);

}  // namespace polymor
