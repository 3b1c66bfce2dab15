#include "polymor/loewner.hpp"

#include <chrono>
#include <iostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "polymor/kron.hpp"

namespace polymor {

namespace {

LoewnerPencil finish_pencil(std::vector<MatX> L_blocks, std::vector<MatX> Ls_blocks) {
  LoewnerPencil pencil;
  pencil.L_blocks = std::move(L_blocks);
  pencil.Ls_blocks = std::move(Ls_blocks);

  const Index kW = pencil.L_blocks.front().rows();
  const Index kV = pencil.L_blocks.front().cols();
  const Index nb = static_cast<Index>(pencil.L_blocks.size() + pencil.Ls_blocks.size());

  MatX rowcat(kW, nb * kV);
  MatX colstack(nb * kW, kV);
  Index off = 0;
  for (const auto& blk : pencil.L_blocks) {
    rowcat.middleCols(off * kV, kV) = blk;
    colstack.middleRows(off * kW, kW) = blk;
    ++off;
  }
  for (const auto& blk : pencil.Ls_blocks) {
    rowcat.middleCols(off * kV, kV) = blk;
    colstack.middleRows(off * kW, kW) = blk;
    ++off;
  }

  Eigen::BDCSVD<MatX> svd_row(rowcat, Eigen::ComputeThinU);
  Eigen::BDCSVD<MatX> svd_col(colstack, Eigen::ComputeThinV);
  pencil.sv_row = svd_row.singularValues();
  pencil.sv_col = svd_col.singularValues();
  pencil.Y1 = svd_row.matrixU();
  pencil.X2 = svd_col.matrixV();
  return pencil;
}

}  // namespace

LoewnerPencil build_pencil(const PolynomialSystem& sys, const MatX& V, const MatX& W) {
  if (V.cols() == 0 || W.cols() == 0) throw std::invalid_argument("build_pencil: empty bases");
  const MatX L = -(W.transpose() * (sys.E * V));
  const MatX Ls = -(W.transpose() * (sys.A * V));
  return finish_pencil({L}, {Ls});
}

LoewnerPencil build_pencil(const AffineParametricSystem& psys, const MatX& V, const MatX& W) {
  if (V.cols() == 0 || W.cols() == 0) throw std::invalid_argument("build_pencil: empty bases");
  std::vector<MatX> L_blocks, Ls_blocks;
  for (const auto& t : psys.E_terms) L_blocks.push_back(W.transpose() * (t.value * V));
  for (const auto& t : psys.A_terms) Ls_blocks.push_back(W.transpose() * (t.value * V));
  return finish_pencil(std::move(L_blocks), std::move(Ls_blocks));
}

std::pair<CMatX, CMatX> divided_difference_pencil(const CVecX& H_at_sigma, const CVecX& H_at_mu,
                                                  const std::vector<Complex>& sigma,
                                                  const std::vector<Complex>& mu) {
  const Index nr = static_cast<Index>(mu.size());
  const Index nc = static_cast<Index>(sigma.size());
  if (H_at_sigma.size() != nc || H_at_mu.size() != nr)
    throw std::invalid_argument("divided_difference_pencil: data/point count mismatch");
  CMatX L(nr, nc), Ls(nr, nc);
  for (Index i = 0; i < nr; ++i) {
    for (Index j = 0; j < nc; ++j) {
      const Complex den = mu[i] - sigma[j];
      if (den == Complex(0, 0))
        throw std::invalid_argument(
            "divided_difference_pencil: coincident left/right points (Hermite data not "
            "supported here)");
      L(i, j) = (H_at_mu[i] - H_at_sigma[j]) / den;
      Ls(i, j) = (mu[i] * H_at_mu[i] - sigma[j] * H_at_sigma[j]) / den;
    }
  }
  return {L, Ls};
}

OrderSelection select_order(const LoewnerPencil& pencil, std::optional<int> order, double tau) {
  const Index avail = std::min(pencil.Y1.cols(), pencil.X2.cols());
  int r;
  if (order) {
    r = *order;
    if (r < 1 || r > avail)
      throw std::invalid_argument("select_order: requested order exceeds the available rank");
  } else {
    auto count_above = [&](const VecX& sv) {
      if (sv.size() == 0 || sv[0] == 0.0) return Index(0);
      Index k = 0;
      while (k < sv.size() && sv[k] / sv[0] >= tau) ++k;
      return k;
    };
    r = static_cast<int>(
        std::min(avail, std::max(count_above(pencil.sv_row), count_above(pencil.sv_col))));
    if (r == 0) throw std::runtime_error("select_order: pencil is numerically zero");
  }
  OrderSelection sel;
  sel.r = r;
  sel.Yr = pencil.Y1.leftCols(r);
  sel.Xr = pencil.X2.leftCols(r);
  return sel;
}

namespace {

// Wᵀ · (nonlinearity applied to V^(⊗xi)) as a dense r x r^xi matrix.
MatX project_nonlinearity(const PolynomialSystem& sys, const PolynomialNonlinearity& nl, int xi,
                          const MatX& V, const MatX& W) {
  Index cols = 1;
  for (int k = 0; k < xi; ++k) cols *= V.cols();
  MatX acc = MatX::Zero(V.rows(), cols);
  if (nl.has_hadamard()) {
    for (const auto& t : nl.terms) {
      std::vector<MatX> fac(static_cast<std::size_t>(xi));
      for (int l = 0; l < xi; ++l) fac[static_cast<std::size_t>(l)] = t.factors[l] * V;
      acc += t.coefficient * row_kron(fac);
    }
  } else {
    std::vector<Index> slots(static_cast<std::size_t>(xi), sys.n);
    std::vector<MatX> fac(static_cast<std::size_t>(xi), V);
    acc = kron_contract(*nl.unfolding, slots, fac);
  }
  return W.transpose() * acc;
}

void check_orthonormal(const MatX& Q, const char* name) {
  const double dev = (Q.transpose() * Q - MatX::Identity(Q.cols(), Q.cols())).norm();
  if (dev > 1e-8)
    std::cerr << "polymor: warning: " << name
              << " deviates from orthonormality (|QᵀQ-I| = " << dev << ")\n";
}

}  // namespace

ReducedSystem assemble_rom(const PolynomialSystem& sys, const MatX& V_eff, const MatX& W_eff) {
  if (V_eff.rows() != sys.n || W_eff.rows() != sys.n)
    throw std::invalid_argument("assemble_rom: basis row count mismatch");
  check_orthonormal(V_eff, "V_eff");
  check_orthonormal(W_eff, "W_eff");

  ReducedSystem rom;
  rom.r = V_eff.cols();
  rom.m = sys.m;
  rom.q = sys.q;
  rom.d = sys.d;
  rom.E = W_eff.transpose() * (sys.E * V_eff);
  rom.A = W_eff.transpose() * (sys.A * V_eff);
  rom.B = W_eff.transpose() * MatX(sys.B);
  rom.C = MatX(sys.C) * V_eff;

  for (const auto& [xi, nl] : sys.H) {
    if (nl.empty()) continue;
    rom.H[xi] = project_nonlinearity(sys, nl, xi, V_eff, W_eff);
  }
  for (const auto& [eta, Ne] : sys.N) {
    Index rcols = 1;
    for (int k = 0; k < eta; ++k) rcols *= rom.r;
    MatX Nh(rom.r, sys.m * rcols);
    std::vector<Index> slots(static_cast<std::size_t>(eta), sys.n);
    std::vector<MatX> fac(static_cast<std::size_t>(eta), V_eff);
    for (Index j = 0; j < sys.m; ++j) {
      const MatX block = kron_contract(sys.input_slice(eta, j), slots, fac);
      Nh.middleCols(j * rcols, rcols) = W_eff.transpose() * block;
    }
    rom.N[eta] = std::move(Nh);
  }

  Eigen::FullPivLU<MatX> lu(rom.E);
  if (!lu.isInvertible()) {
    rom.e_singular = true;
    std::cerr << "polymor: warning: reduced E is singular; the ROM is not usable for "
                 "time-domain simulation\n";
  }
  return rom;
}

AffineParametricSystem assemble_rom(const AffineParametricSystem& psys, const MatX& V_eff,
                                    const MatX& W_eff) {
  check_orthonormal(V_eff, "V_eff");
  check_orthonormal(W_eff, "W_eff");
  const Index r = V_eff.cols();

  AffineParametricSystem red;
  red.n = r;
  red.m = psys.m;
  red.q = psys.q;
  red.d = psys.d;
  red.np = psys.np;
  red.box_lo = psys.box_lo;
  red.box_hi = psys.box_hi;

  auto dense_to_sparse = [](const MatX& M) { return SpMat(M.sparseView()); };
  auto dense_to_wide = [](const MatX& M) {
    std::vector<Eigen::Triplet<double, std::int64_t>> trip;
    for (Index i = 0; i < M.rows(); ++i)
      for (Index j = 0; j < M.cols(); ++j)
        if (M(i, j) != 0.0) trip.emplace_back(i, j, M(i, j));
    UnfoldingMat out(M.rows(), M.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  };

  for (const auto& t : psys.E_terms)
    red.E_terms.push_back({t.alpha, dense_to_sparse(W_eff.transpose() * (t.value * V_eff))});
  for (const auto& t : psys.A_terms)
    red.A_terms.push_back({t.alpha, dense_to_sparse(W_eff.transpose() * (t.value * V_eff))});
  for (const auto& t : psys.B_terms)
    red.B_terms.push_back({t.alpha, dense_to_sparse(W_eff.transpose() * MatX(t.value))});
  for (const auto& t : psys.C_terms)
    red.C_terms.push_back({t.alpha, dense_to_sparse(MatX(t.value) * V_eff)});

  // A throwaway shell so the shared projection helper can be reused per term.
  PolynomialSystem shell;
  shell.n = psys.n;
  for (const auto& [xi, terms] : psys.H_terms) {
    std::vector<AffineNonlinearTerm> red_terms;
    for (const auto& t : terms) {
      AffineNonlinearTerm rt;
      rt.alpha = t.alpha;
      rt.value.unfolding = dense_to_wide(project_nonlinearity(shell, t.value, xi, V_eff, W_eff));
      red_terms.push_back(std::move(rt));
    }
    red.H_terms[xi] = std::move(red_terms);
  }
  for (const auto& [eta, terms] : psys.N_terms) {
    Index rcols = 1;
    for (int k = 0; k < eta; ++k) rcols *= r;
    std::vector<AffineTerm<UnfoldingMat>> red_terms;
    std::vector<Index> slots(static_cast<std::size_t>(eta), psys.n);
    std::vector<MatX> fac(static_cast<std::size_t>(eta), V_eff);
    for (const auto& t : terms) {
      MatX Nh(r, psys.m * rcols);
      std::int64_t width = 1;
      for (int k = 0; k < eta; ++k) width *= psys.n;
      for (Index j = 0; j < psys.m; ++j) {
        // Extract slice j of this affine term.
        std::vector<Eigen::Triplet<double, std::int64_t>> strip;
        for (Index i = 0; i < psys.n; ++i)
          for (UnfoldingMat::InnerIterator nz(t.value, i); nz; ++nz)
            if (nz.index() >= j * width && nz.index() < (j + 1) * width)
              strip.emplace_back(i, nz.index() - j * width, nz.value());
        UnfoldingMat slice(psys.n, width);
        slice.setFromTriplets(strip.begin(), strip.end());
        Nh.middleCols(j * rcols, rcols) = W_eff.transpose() * kron_contract(slice, slots, fac);
      }
      red_terms.push_back({t.alpha, dense_to_wide(Nh)});
    }
    red.N_terms[eta] = std::move(red_terms);
  }
  return red;
}

std::vector<ProjectedTerm> projected_hadamard_terms(const PolynomialSystem& sys,
                                                    const MatX& V_eff) {
  std::vector<ProjectedTerm> out;
  for (const auto& [xi, nl] : sys.H) {
    for (const auto& t : nl.terms) {
      ProjectedTerm pt;
      pt.xi = xi;
      pt.coefficient = t.coefficient;
      for (const auto& f : t.factors) pt.factors.push_back(MatX(f * V_eff));
      out.push_back(std::move(pt));
    }
  }
  return out;
}

VecX ReducedSystem::rhs(const VecX& x, const VecX& u) const {
  if (x.size() != r || u.size() != m) throw std::invalid_argument("rhs: dimension mismatch");
  VecX out = A * x + B * u;
  for (const auto& [xi, Hm] : H) out += Hm * kron_pow(x, xi);
  for (const auto& [eta, Nm] : N) {
    const VecX xk = kron_pow(x, eta);
    const Index width = xk.size();
    for (Index j = 0; j < m; ++j) out += u[j] * (Nm.middleCols(j * width, width) * xk);
  }
  return out;
}

namespace {

// d/dx [M x^(⊗xi)] accumulated into J (dense, xi >= 1).
void dense_pow_jacobian(const MatX& M, const VecX& x, int xi, double scale, MatX& J) {
  const Index r = x.size();
  std::vector<Index> digit(static_cast<std::size_t>(xi));
  for (Index c = 0; c < M.cols(); ++c) {
    Index rem = c;
    for (int k = xi - 1; k >= 0; --k) {
      digit[static_cast<std::size_t>(k)] = rem % r;
      rem /= r;
    }
    for (int slot = 0; slot < xi; ++slot) {
      double coeff = scale;
      for (int k = 0; k < xi; ++k)
        if (k != slot) coeff *= x[digit[static_cast<std::size_t>(k)]];
      if (coeff != 0.0) J.col(digit[static_cast<std::size_t>(slot)]) += coeff * M.col(c);
    }
  }
}

}  // namespace

MatX ReducedSystem::jacobian(const VecX& x, const VecX& u) const {
  if (x.size() != r || u.size() != m) throw std::invalid_argument("jacobian: dimension mismatch");
  MatX J = A;
  for (const auto& [xi, Hm] : H) dense_pow_jacobian(Hm, x, xi, 1.0, J);
  for (const auto& [eta, Nm] : N) {
    Index width = 1;
    for (int k = 0; k < eta; ++k) width *= r;
    for (Index j = 0; j < m; ++j) {
      if (u[j] == 0.0) continue;
      dense_pow_jacobian(Nm.middleCols(j * width, width), x, eta, u[j], J);
    }
  }
  return J;
}

PolynomialSystem ReducedSystem::to_polynomial() const {
  PolynomialSystem sys;
  sys.n = r;
  sys.m = m;
  sys.q = q;
  sys.d = d;
  sys.E = E.sparseView();
  sys.A = A.sparseView();
  sys.B = B.sparseView();
  sys.C = C.sparseView();
  auto dense_to_wide = [](const MatX& M) {
    std::vector<Eigen::Triplet<double, std::int64_t>> trip;
    for (Index i = 0; i < M.rows(); ++i)
      for (Index j = 0; j < M.cols(); ++j)
        if (M(i, j) != 0.0) trip.emplace_back(i, j, M(i, j));
    UnfoldingMat out(M.rows(), M.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  };
  for (const auto& [xi, Hm] : H) sys.H[xi].unfolding = dense_to_wide(Hm);
  for (const auto& [eta, Nm] : N) sys.N[eta] = dense_to_wide(Nm);
  return sys;
}

ReducedSystem ReducedSystem::from_polynomial(const PolynomialSystem& sys) {
  ReducedSystem rom;
  rom.r = sys.n;
  rom.m = sys.m;
  rom.q = sys.q;
  rom.d = sys.d;
  rom.E = MatX(sys.E);
  rom.A = MatX(sys.A);
  rom.B = MatX(sys.B);
  rom.C = MatX(sys.C);
  for (const auto& [xi, nl] : sys.H) {
    if (nl.has_unfolding()) {
      rom.H[xi] = MatX(nl.unfolding->cast<double>());
    } else if (nl.has_hadamard()) {
      Index cols = 1;
      for (int k = 0; k < xi; ++k) cols *= sys.n;
      MatX acc = MatX::Zero(sys.n, cols);
      for (const auto& t : nl.terms)
        acc += MatX(explicit_unfolding(t, cols).cast<double>());
      rom.H[xi] = std::move(acc);
    }
  }
  for (const auto& [eta, Nm] : sys.N) rom.N[eta] = MatX(Nm.cast<double>());
  return rom;
}

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

void normalize_columns(MatX& M) {
  for (Index j = 0; j < M.cols(); ++j) {
    const double nrm = M.col(j).norm();
    if (nrm > 0.0) M.col(j) /= nrm;
  }
}

template <typename System>
ReductionResult reduce_impl(const System& sys, const InterpolationSet& iset,
                            const ReduceOptions& opts, RawBases bases) {
  using clock = std::chrono::steady_clock;
  ReductionResult res;
  res.one_sided = opts.one_sided;
  res.bases = std::move(bases);

  if (opts.normalize_columns) {
    normalize_columns(res.bases.V);
    normalize_columns(res.bases.W);
  }
  if (opts.one_sided) {
    res.bases.W = res.bases.V;
    res.bases.w_cols = res.bases.v_cols;
  }

  const auto t1 = clock::now();
  res.pencil = build_pencil(sys, res.bases.V, res.bases.W);
  res.timings.pencil_ms = ms_since(t1);

  const auto t2 = clock::now();
  const OrderSelection sel = select_order(res.pencil, opts.order, opts.tau);
  res.order = sel.r;
  res.V_eff = orth_trim(res.bases.V * sel.Xr, opts.orth_tol);
  res.W_eff = opts.one_sided ? res.V_eff : orth_trim(res.bases.W * sel.Yr, opts.orth_tol);
  res.timings.select_ms = ms_since(t2);
  (void)iset;
  return res;
}

}  // namespace

ReductionResult reduce(const PolynomialSystem& sys, const InterpolationSet& iset,
                       const ReduceOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RawBases bases = (iset.mode == InterpolationSet::Mode::SisoGeneral)
                       ? build_bases_siso_general(sys, iset)
                       : build_bases_tangential(sys, iset);
  const double bases_ms = ms_since(t0);

  ReductionResult res = reduce_impl(sys, iset, opts, std::move(bases));
  res.timings.bases_ms = bases_ms;

  const auto t3 = clock::now();
  res.rom = assemble_rom(sys, res.V_eff, res.W_eff);
  res.hadamard_projection = projected_hadamard_terms(sys, res.V_eff);
  res.timings.assemble_ms = ms_since(t3);
  res.timings.total_ms = ms_since(t0);
  return res;
}

ReductionResult reduce(const AffineParametricSystem& psys, const InterpolationSet& iset,
                       const ReduceOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RawBases bases = build_bases_parametric(psys, iset);
  const double bases_ms = ms_since(t0);

  ReductionResult res = reduce_impl(psys, iset, opts, std::move(bases));
  res.timings.bases_ms = bases_ms;

  const auto t3 = clock::now();
  res.prom = assemble_rom(psys, res.V_eff, res.W_eff);
  res.timings.assemble_ms = ms_since(t3);
  res.timings.total_ms = ms_since(t0);
  return res;
}

}  // namespace polymor
