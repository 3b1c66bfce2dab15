#include <doctest.h>

#include <array>

#include <Eigen/Dense>
#include <polymor/kron.hpp>
#include <polymor/loewner.hpp>
#include <polymor/transfer.hpp>

#include "helpers.hpp"

using namespace polymor;

namespace {

SpMat sparse_identity(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

SpMat scalar_mat(double v) {
  SpMat M(1, 1);
  M.insert(0, 0) = v;
  return M;
}

PolynomialSystem random_linear_siso(Index n, std::mt19937& rng) {
  PolynomialSystem sys;
  sys.n = n;
  sys.m = sys.q = 1;
  sys.d = 1;
  sys.E = sparse_identity(n);
  sys.A = oracle::random_stable_sparse(n, 0.3, rng);
  sys.B = oracle::random_sparse(n, 1, 0.7, rng);
  sys.C = oracle::random_sparse(1, n, 0.7, rng);
  return sys;
}

// Random stable polynomial system with H_2, H_3 and N_1 present.
PolynomialSystem random_full_system(Index n, Index m, Index q, std::mt19937& rng,
                                    double nl_scale = 0.3) {
  PolynomialSystem sys;
  sys.n = n;
  sys.m = m;
  sys.q = q;
  sys.d = 3;
  sys.E = sparse_identity(n);
  sys.A = oracle::random_stable_sparse(n, 0.25, rng);
  sys.B = oracle::random_sparse(n, m, 0.7, rng);
  sys.C = oracle::random_sparse(q, n, 0.7, rng);

  HadamardTerm t2;
  t2.coefficient = nl_scale;
  t2.factors = {oracle::random_sparse(n, n, 0.2, rng), oracle::random_sparse(n, n, 0.2, rng)};
  sys.H[2].terms.push_back(t2);
  HadamardTerm t3;
  t3.coefficient = -nl_scale;
  t3.factors = {oracle::random_sparse(n, n, 0.15, rng), oracle::random_sparse(n, n, 0.15, rng),
                oracle::random_sparse(n, n, 0.15, rng)};
  sys.H[3].terms.push_back(t3);

  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  const SpMat N0 = oracle::random_sparse(n, n, 0.2, rng);
  for (Index col = 0; col < N0.outerSize(); ++col)
    for (SpMat::InnerIterator it(N0, col); it; ++it)
      trip.emplace_back(it.row(), col, nl_scale * it.value());
  if (m > 1) {
    const SpMat N1 = oracle::random_sparse(n, n, 0.2, rng);
    for (Index col = 0; col < N1.outerSize(); ++col)
      for (SpMat::InnerIterator it(N1, col); it; ++it)
        trip.emplace_back(it.row(), n + col, nl_scale * it.value());
  }
  UnfoldingMat N(n, m * n);
  N.setFromTriplets(trip.begin(), trip.end());
  sys.N[1] = N;
  return sys;
}

CMatX kron_with_identity(Index m, const CVecX& v, int copies) {
  // I_m ⊗ v^(⊗copies) as a dense matrix.
  CMatX vk = CMatX::Ones(1, 1);
  for (int k = 0; k < copies; ++k) vk = kron(vk, CMatX(v));
  return kron(CMatX(CMatX::Identity(m, m)), vk);
}

}  // namespace

TEST_CASE("scalar Loewner pencil matches divided differences") {
  PolynomialSystem sys;
  sys.n = sys.m = sys.q = 1;
  sys.d = 1;
  sys.E = scalar_mat(1);
  sys.A = scalar_mat(-1);
  sys.B = scalar_mat(1);
  sys.C = scalar_mat(1);

  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::SisoGeneral;
  iset.sigma = {Complex(1, 0)};
  iset.mu = {Complex(2, 0)};

  const RawBases rb = build_bases_siso_general(sys, iset);
  const LoewnerPencil pencil = build_pencil(sys, rb.V, rb.W);
  CHECK(pencil.L_blocks.front()(0, 0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  CHECK(pencil.Ls_blocks.front()(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

  // Same numbers from the data-driven construction with H(s) = 1/(s+1).
  CVecX Hs(1), Hm(1);
  Hs << Complex(0.5, 0);
  Hm << Complex(1.0 / 3.0, 0);
  const auto [L, Ls] = divided_difference_pencil(Hs, Hm, iset.sigma, iset.mu);
  CHECK(std::abs(L(0, 0) - Complex(-1.0 / 6.0)) <= 1e-15);
  CHECK(std::abs(Ls(0, 0) - Complex(1.0 / 6.0)) <= 1e-15);
}

TEST_CASE("projection pencil equals divided differences on random linear SISO systems") {
  std::mt19937 rng(61);
  for (int rep = 0; rep < 5; ++rep) {
    const PolynomialSystem sys = random_linear_siso(30, rng);
    InterpolationSet iset;
    iset.mode = InterpolationSet::Mode::SisoGeneral;
    iset.sigma = log_spaced_frequencies(0.1, 50, 4);
    iset.mu = log_spaced_frequencies(0.3, 20, 4);

    const RawBases rb = build_bases_siso_general(sys, iset);
    const LoewnerPencil pencil = build_pencil(sys, rb.V, rb.W);

    PhiCache cache(sys);
    CVecX Hs(4), Hm(4);
    for (int i = 0; i < 4; ++i) {
      Hs[i] = eval_FL(cache, iset.sigma[i])(0, 0);
      Hm[i] = eval_FL(cache, iset.mu[i])(0, 0);
    }
    const auto [L, Ls] = divided_difference_pencil(Hs, Hm, iset.sigma, iset.mu);
    CHECK((pencil.L_blocks.front() - L.real()).norm() <= 1e-10 * L.norm());
    CHECK((pencil.Ls_blocks.front() - Ls.real()).norm() <= 1e-10 * Ls.norm());
  }
}

TEST_CASE("divided differences of a constant transfer function") {
  const std::vector<Complex> sigma = {Complex(1, 0), Complex(2, 0)};
  const std::vector<Complex> mu = {Complex(3, 0), Complex(5, 0)};
  const CVecX Hs = CVecX::Constant(2, Complex(4.2, 0));
  const CVecX Hm = CVecX::Constant(2, Complex(4.2, 0));
  const auto [L, Ls] = divided_difference_pencil(Hs, Hm, sigma, mu);
  CHECK(L.norm() <= 1e-15);
  CHECK((Ls - CMatX::Constant(2, 2, Complex(4.2, 0))).norm() <= 1e-14);

  CHECK_THROWS(divided_difference_pencil(Hs, Hm, mu, mu));
}

TEST_CASE("congruent pencil of an SPD mass is symmetric negative definite") {
  std::mt19937 rng(63);
  PolynomialSystem sys = random_linear_siso(10, rng);
  const MatX R = oracle::random_dense(10, 10, rng);
  const MatX Espd = R * R.transpose() + 10.0 * MatX::Identity(10, 10);
  sys.E = Espd.sparseView();

  const MatX V = oracle::random_dense(10, 4, rng);
  const LoewnerPencil pencil = build_pencil(sys, V, V);
  const MatX& L = pencil.L_blocks.front();
  CHECK((L - L.transpose()).norm() <= 1e-12 * L.norm());
  const VecX eig = Eigen::SelfAdjointEigenSolver<MatX>(L).eigenvalues();
  CHECK(eig.maxCoeff() < 0.0);
}

TEST_CASE("order selection by threshold and by fixed order") {
  std::mt19937 rng(65);
  // Exact rank-3 pencil.
  const MatX U = oracle::random_dense(12, 3, rng);
  const MatX Vv = oracle::random_dense(10, 3, rng);
  PolynomialSystem dummy;
  dummy.n = 12;
  dummy.E = sparse_identity(12);
  dummy.A = sparse_identity(12);

  LoewnerPencil pencil;
  pencil.L_blocks = {U * Vv.transpose()};
  pencil.Ls_blocks = {U * MatX(oracle::random_dense(3, 3, rng)) * Vv.transpose()};
  MatX rowcat(12, 20);
  rowcat << pencil.L_blocks[0], pencil.Ls_blocks[0];
  MatX colstack(24, 10);
  colstack << pencil.L_blocks[0], pencil.Ls_blocks[0];
  Eigen::BDCSVD<MatX> s1(rowcat, Eigen::ComputeThinU);
  Eigen::BDCSVD<MatX> s2(colstack, Eigen::ComputeThinV);
  pencil.sv_row = s1.singularValues();
  pencil.sv_col = s2.singularValues();
  pencil.Y1 = s1.matrixU();
  pencil.X2 = s2.matrixV();

  const OrderSelection bytau = select_order(pencil, std::nullopt, 1e-8);
  CHECK(bytau.r == 3);

  const OrderSelection fixed = select_order(pencil, 2);
  CHECK(fixed.Yr.rows() == 12);
  CHECK(fixed.Yr.cols() == 2);
  CHECK(fixed.Xr.rows() == 10);
  CHECK(fixed.Xr.cols() == 2);

  CHECK_THROWS(select_order(pencil, 11));
}

TEST_CASE("identity projection reproduces the original system") {
  std::mt19937 rng(67);
  const Index n = 6;
  const PolynomialSystem sys = random_full_system(n, 1, 1, rng);
  const MatX I = MatX::Identity(n, n);
  const ReducedSystem rom = assemble_rom(sys, I, I);

  for (int rep = 0; rep < 10; ++rep) {
    const VecX x = oracle::random_vec(n, rng);
    const VecX u = oracle::random_vec(1, rng);
    const VecX a = sys.rhs(x, u);
    const VecX b = rom.rhs(x, u);
    CHECK((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    const MatX Ja = MatX(sys.jacobian(x, u));
    const MatX Jb = rom.jacobian(x, u);
    CHECK((Ja - Jb).norm() <= 1e-11 * (1.0 + Ja.norm()));
  }
}

TEST_CASE("reduced Hadamard assembly equals the explicit Kronecker projection") {
  std::mt19937 rng(69);
  const Index n = 8, r = 3;
  const PolynomialSystem sys = random_full_system(n, 1, 1, rng);
  const MatX V = orth_trim(oracle::random_dense(n, r, rng));
  const MatX W = orth_trim(oracle::random_dense(n, r, rng));
  const ReducedSystem rom = assemble_rom(sys, V, W);

  // Oracle: dense H3 unfolding times the dense V ⊗ V ⊗ V.
  const MatX H3 = MatX(explicit_unfolding(sys.H.at(3).terms.front()).cast<double>());
  const MatX VVV = oracle::dense_kron({V, V, V});
  const MatX expect = W.transpose() * H3 * VVV;
  CHECK((rom.H.at(3) - expect).norm() <= 1e-12 * (1.0 + expect.norm()));

  const MatX H2 = MatX(explicit_unfolding(sys.H.at(2).terms.front()).cast<double>());
  const MatX expect2 = W.transpose() * H2 * oracle::dense_kron({V, V});
  CHECK((rom.H.at(2) - expect2).norm() <= 1e-12 * (1.0 + expect2.norm()));

  // N projection: Wᵀ N (I_m ⊗ V) for eta = 1, m = 1.
  const MatX N1 = MatX(sys.N.at(1).cast<double>());
  const MatX expectN = W.transpose() * N1 * V;
  CHECK((rom.N.at(1) - expectN).norm() <= 1e-12 * (1.0 + expectN.norm()));
}

TEST_CASE("untruncated tangential ROM satisfies the interpolation conditions") {
  std::mt19937 rng(71);
  const Index n = 14, m = 2, q = 2;
  const PolynomialSystem sys = random_full_system(n, m, q, rng, 0.2);

  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::Tangential;
  iset.sigma = log_spaced_frequencies(0.5, 8.0, 3);
  fill_default_directions(iset, sys);

  ReduceOptions opts;
  opts.tau = 1e-13;
  const ReductionResult res = reduce(sys, iset, opts);
  const PolynomialSystem romp = res.rom.to_polynomial();

  PhiCache full(sys);
  PhiCache redu(romp);
  const double tol = 1e-6;
  const double fd_h = 1e-5, fd_tol = 1e-4;

  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    const Complex s = iset.sigma[i];
    const CVecX b = iset.b[i], c = iset.c[i];

    // Right, left, and Hermite conditions on F_L.
    const CMatX FL = eval_FL(full, s), FLr = eval_FL(redu, s);
    CHECK((FL * b - FLr * b).norm() <= tol * (FL * b).norm());
    CHECK((b.transpose() * FL.transpose() * c - b.transpose() * FLr.transpose() * c).norm() <=
          tol * (FL).norm());
    CHECK(((FL.transpose() * c) - (FLr.transpose() * c)).norm() <=
          tol * (FL.transpose() * c).norm());
    {
      const Complex sp = s + fd_h, sm = s - fd_h;
      const Complex dfull =
          ((c.transpose() * eval_FL(full, sp) * b)(0) - (c.transpose() * eval_FL(full, sm) * b)(0)) /
          (2 * fd_h);
      const Complex dred =
          ((c.transpose() * eval_FL(redu, sp) * b)(0) - (c.transpose() * eval_FL(redu, sm) * b)(0)) /
          (2 * fd_h);
      CHECK(std::abs(dfull - dred) <= fd_tol * (1.0 + std::abs(dfull)));
    }

    // F_N^{(1)} conditions.
    {
      const std::array<Complex, 2> tup = {s, s};
      const CMatX FN = eval_FN(full, 1, tup), FNr = eval_FN(redu, 1, tup);
      const CMatX right = kron_with_identity(m, b, 1);
      CHECK((FN * right - FNr * right).norm() <= tol * (FN * right).norm());
      const CMatX left = kron_with_identity(m, b, 0);  // I_m^(⊗2) ⊗ b^(⊗0) = I_{m²}? see below
      // eq (two-sided): cᵀ F_N (I_m ⊗ I_m ⊗ b^{eta-1}) with eta = 1 collapses to cᵀ F_N.
      CHECK(((c.transpose() * FN) - (c.transpose() * FNr)).norm() <=
            tol * (c.transpose() * FN).norm());
      (void)left;
      for (int j = 0; j < 2; ++j) {
        std::array<Complex, 2> tp = tup, tm = tup;
        tp[j] += fd_h;
        tm[j] -= fd_h;
        const Complex dfull = ((c.transpose() * eval_FN(full, 1, tp) * right)(0) -
                               (c.transpose() * eval_FN(full, 1, tm) * right)(0)) /
                              (2 * fd_h);
        const Complex dred = ((c.transpose() * eval_FN(redu, 1, tp) * right)(0) -
                              (c.transpose() * eval_FN(redu, 1, tm) * right)(0)) /
                             (2 * fd_h);
        CHECK(std::abs(dfull - dred) <= fd_tol * (1.0 + std::abs(dfull)));
      }
    }

    // F_H^{(xi)} conditions for xi = 2, 3.
    for (const int xi : {2, 3}) {
      std::vector<Complex> tup(static_cast<std::size_t>(xi) + 1, s);
      const CMatX FH = eval_FH(full, xi, tup), FHr = eval_FH(redu, xi, tup);
      const CVecX bk = kron_pow(b, xi);
      CHECK((FH * bk - FHr * bk).norm() <= tol * (FH * bk).norm());
      const CMatX right_m = kron_with_identity(m, b, xi - 1);
      CHECK(((c.transpose() * FH * right_m) - (c.transpose() * FHr * right_m)).norm() <=
            tol * (c.transpose() * FH * right_m).norm());
      for (int j = 0; j <= xi; ++j) {
        std::vector<Complex> tp = tup, tm = tup;
        tp[static_cast<std::size_t>(j)] += fd_h;
        tm[static_cast<std::size_t>(j)] -= fd_h;
        const Complex dfull = ((c.transpose() * eval_FH(full, xi, tp) * bk)(0) -
                               (c.transpose() * eval_FH(full, xi, tm) * bk)(0)) /
                              (2 * fd_h);
        const Complex dred = ((c.transpose() * eval_FH(redu, xi, tp) * bk)(0) -
                              (c.transpose() * eval_FH(redu, xi, tm) * bk)(0)) /
                             (2 * fd_h);
        CHECK(std::abs(dfull - dred) <= fd_tol * (1.0 + std::abs(dfull)));
      }
    }
  }
}

TEST_CASE("untruncated general SISO ROM interpolates at cross tuples") {
  std::mt19937 rng(73);
  const Index n = 12;
  const PolynomialSystem sys = random_full_system(n, 1, 1, rng, 0.2);

  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::SisoGeneral;
  iset.sigma = log_spaced_frequencies(0.5, 8.0, 3);
  iset.mu = log_spaced_frequencies(0.8, 5.0, 3);

  ReduceOptions opts;
  opts.tau = 1e-13;
  const ReductionResult res = reduce(sys, iset, opts);
  const PolynomialSystem romp = res.rom.to_polynomial();

  PhiCache full(sys);
  PhiCache redu(romp);
  const double tol = 1e-6;

  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    const Complex s = iset.sigma[i], mup = iset.mu[i];
    CHECK(std::abs(eval_FL(full, s)(0, 0) - eval_FL(redu, s)(0, 0)) <=
          tol * std::abs(eval_FL(full, s)(0, 0)));
    CHECK(std::abs(eval_FL(full, mup)(0, 0) - eval_FL(redu, mup)(0, 0)) <=
          tol * std::abs(eval_FL(full, mup)(0, 0)));

    const std::array<Complex, 2> nd = {s, s};
    const std::array<Complex, 2> nc = {s, mup};  // beta in the final slot
    CHECK(std::abs(eval_FN(full, 1, nd)(0, 0) - eval_FN(redu, 1, nd)(0, 0)) <=
          tol * std::abs(eval_FN(full, 1, nd)(0, 0)));
    CHECK(std::abs(eval_FN(full, 1, nc)(0, 0) - eval_FN(redu, 1, nc)(0, 0)) <=
          tol * std::abs(eval_FN(full, 1, nc)(0, 0)));

    for (const int xi : {2, 3}) {
      std::vector<Complex> hd(static_cast<std::size_t>(xi) + 1, s);
      std::vector<Complex> hc = hd;
      hc.back() = mup;
      CHECK(std::abs(eval_FH(full, xi, hd)(0, 0) - eval_FH(redu, xi, hd)(0, 0)) <=
            tol * std::abs(eval_FH(full, xi, hd)(0, 0)));
      CHECK(std::abs(eval_FH(full, xi, hc)(0, 0) - eval_FH(redu, xi, hc)(0, 0)) <=
            tol * std::abs(eval_FH(full, xi, hc)(0, 0)));
    }
  }
}

TEST_CASE("one-sided reduction is Galerkin") {
  std::mt19937 rng(75);
  const PolynomialSystem sys = random_full_system(10, 1, 1, rng, 0.2);
  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::Tangential;
  iset.sigma = log_spaced_frequencies(0.5, 5.0, 3);
  fill_default_directions(iset, sys);

  ReduceOptions opts;
  opts.one_sided = true;
  opts.order = 4;
  const ReductionResult res = reduce(sys, iset, opts);
  CHECK(res.V_eff == res.W_eff);
  CHECK(res.rom.r == 4);
}

TEST_CASE("parametric projection commutes with freezing") {
  std::mt19937 rng(77);
  const Index n = 8;
  AffineParametricSystem psys;
  psys.n = n;
  psys.m = psys.q = 1;
  psys.d = 3;
  psys.np = 1;
  psys.box_lo = VecX::Constant(1, 0.25);
  psys.box_hi = VecX::Constant(1, 2.0);
  psys.E_terms.push_back({CoefficientFn::one(), sparse_identity(n)});
  psys.A_terms.push_back({CoefficientFn::one(), oracle::random_stable_sparse(n, 0.4, rng)});
  psys.A_terms.push_back({CoefficientFn::param(0), sparse_identity(n)});
  psys.B_terms.push_back({CoefficientFn::one(), oracle::random_sparse(n, 1, 0.8, rng)});
  psys.C_terms.push_back({CoefficientFn::one(), oracle::random_sparse(1, n, 0.8, rng)});
  AffineNonlinearTerm cubic;
  cubic.alpha = CoefficientFn::one();
  HadamardTerm ht;
  ht.coefficient = -0.3;
  ht.factors = {sparse_identity(n), sparse_identity(n), sparse_identity(n)};
  cubic.value.terms.push_back(ht);
  psys.H_terms[3].push_back(cubic);

  const MatX V = orth_trim(oracle::random_dense(n, 3, rng));
  const MatX W = orth_trim(oracle::random_dense(n, 3, rng));

  VecX p(1);
  p << 0.8;
  const AffineParametricSystem prom = assemble_rom(psys, V, W);
  const PolynomialSystem frozen_then_reduced = assemble_rom(psys.assemble_at(p), V, W).to_polynomial();
  const PolynomialSystem reduced_then_frozen = prom.assemble_at(p);

  CHECK((MatX(frozen_then_reduced.A) - MatX(reduced_then_frozen.A)).norm() <= 1e-12);
  CHECK((MatX(frozen_then_reduced.E) - MatX(reduced_then_frozen.E)).norm() <= 1e-12);
  const MatX h_a = MatX(frozen_then_reduced.H.at(3).unfolding->cast<double>());
  const MatX h_b = MatX(reduced_then_frozen.H.at(3).unfolding->cast<double>());
  CHECK((h_a - h_b).norm() <= 1e-12 * (1.0 + h_a.norm()));
}

TEST_CASE("untruncated parametric ROM interpolates at its points") {
  std::mt19937 rng(79);
  const Index n = 10;
  AffineParametricSystem psys;
  psys.n = n;
  psys.m = psys.q = 1;
  psys.d = 3;
  psys.np = 1;
  psys.box_lo = VecX::Constant(1, 0.25);
  psys.box_hi = VecX::Constant(1, 2.0);
  psys.E_terms.push_back({CoefficientFn::one(), sparse_identity(n)});
  psys.A_terms.push_back({CoefficientFn::one(), oracle::random_stable_sparse(n, 0.4, rng)});
  psys.A_terms.push_back({CoefficientFn::param(0), sparse_identity(n)});
  psys.B_terms.push_back({CoefficientFn::one(), oracle::random_sparse(n, 1, 0.8, rng)});
  psys.C_terms.push_back({CoefficientFn::one(), oracle::random_sparse(1, n, 0.8, rng)});
  AffineNonlinearTerm cubic;
  cubic.alpha = CoefficientFn::one();
  HadamardTerm ht;
  ht.coefficient = -0.2;
  ht.factors = {sparse_identity(n), sparse_identity(n), sparse_identity(n)};
  cubic.value.terms.push_back(ht);
  psys.H_terms[3].push_back(cubic);

  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::ParametricTangential;
  iset.sigma = log_spaced_frequencies(0.5, 5.0, 4);
  iset.p = uniform_parameter_points(psys.box_lo, psys.box_hi, 4, 3);
  fill_default_directions(iset, psys);

  ReduceOptions opts;
  opts.tau = 1e-13;
  const ReductionResult res = reduce(psys, iset, opts);
  REQUIRE(res.prom.has_value());

  ParametricEvaluator full(psys);
  const double tol = 1e-6;
  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    const Complex s = iset.sigma[i];
    const VecX& p = iset.p[i];
    const PolynomialSystem rom_at_p = res.prom->assemble_at(p);
    PhiCache redu(rom_at_p);
    CHECK(std::abs(full.eval_FL(s, p)(0, 0) - eval_FL(redu, s)(0, 0)) <=
          tol * std::abs(full.eval_FL(s, p)(0, 0)));
    const std::vector<Complex> hd(4, s);
    CHECK(std::abs(full.eval_FH(3, hd, p)(0, 0) - eval_FH(redu, 3, hd)(0, 0)) <=
          tol * std::abs(full.eval_FH(3, hd, p)(0, 0)));
  }
}
