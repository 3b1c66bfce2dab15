#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <polymor/benchmarks.hpp>
#include <polymor/ode.hpp>
#include <polymor/transfer.hpp>

#include "helpers.hpp"

using namespace polymor;

namespace {

// Steady state of rhs(x, u) = 0 by plain Newton from zero.
VecX steady_state(const PolynomialSystem& sys, const VecX& u) {
  VecX x = VecX::Zero(sys.n);
  for (int it = 0; it < 100; ++it) {
    const VecX f = sys.rhs(x, u);
    Eigen::SparseLU<SpMat> lu(sys.jacobian(x, u));
    REQUIRE(lu.info() == Eigen::Success);
    const VecX dx = lu.solve(-f);
    x += dx;
    if (dx.cwiseAbs().maxCoeff() < 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  return x;
}

}  // namespace

TEST_CASE("chafee dimensions and zero rest state") {
  const PolynomialSystem sys = make_chafee(500);
  CHECK(sys.n == 500);
  CHECK(sys.m == 1);
  CHECK(sys.q == 1);
  CHECK(sys.d == 3);
  CHECK(sys.rhs(VecX::Zero(500), VecX::Zero(1)).norm() == 0.0);
  CHECK(sys.H.at(3).terms.size() == 1);
  CHECK(sys.N.empty());
}

TEST_CASE("chafee steady response converges at second order in the grid") {
  // v ≡ u is an exact equilibrium at u = 1; u = 2 forces a boundary layer
  // so the discretization error is visible.
  const VecX u = 2.0 * VecX::Ones(1);
  std::vector<double> y;
  for (const Index k : {50, 100, 200}) {
    const PolynomialSystem sys = make_chafee(k);
    const VecX x = steady_state(sys, u);
    y.push_back((sys.C * x)(0));
  }
  // Richardson ratio (y_50 - y_100)/(y_100 - y_200) near 4 for second order.
  const double ratio = (y[0] - y[1]) / (y[1] - y[2]);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("parametric chafee at p = 1 equals the non-parametric system") {
  const AffineParametricSystem psys = make_chafee_parametric(60);
  VecX p(1);
  p << 1.0;
  const PolynomialSystem frozen = psys.assemble_at(p);
  const PolynomialSystem direct = make_chafee(60);
  CHECK((MatX(frozen.A) - MatX(direct.A)).norm() <= 1e-14 * MatX(direct.A).norm());
  CHECK(MatX(frozen.B) == MatX(direct.B));
  CHECK(MatX(frozen.C) == MatX(direct.C));
}

TEST_CASE("parametric chafee is affine in p across the box") {
  const AffineParametricSystem psys = make_chafee_parametric(40);
  VecX plo(1), phi(1);
  plo << 0.25;
  phi << 2.0;
  const MatX Alo = MatX(psys.assemble_at(plo).A);
  const MatX Ahi = MatX(psys.assemble_at(phi).A);
  // A(p) - p I is the constant diffusion part.
  const MatX Dlo = Alo - 0.25 * MatX::Identity(40, 40);
  const MatX Dhi = Ahi - 2.0 * MatX::Identity(40, 40);
  CHECK((Dlo - Dhi).norm() <= 1e-12 * Dlo.norm());
}

TEST_CASE("frozen parametric transfer matches a hand-assembled system") {
  const Index k = 30;
  const AffineParametricSystem psys = make_chafee_parametric(k);
  VecX p(1);
  p << 0.5;
  ParametricEvaluator ev(psys);
  const Complex s(2.0, 0.0);
  const CMatX via_param = ev.eval_FL(s, p);

  const double h = 1.0 / static_cast<double>(k);
  MatX A = MatX::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    A(i, i) = -2.0 / (h * h) + 0.5;
    if (i > 0) A(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < k) A(i, i + 1) = 1.0 / (h * h);
  }
  A(k - 1, k - 2) = 2.0 / (h * h);
  VecX B = VecX::Zero(k);
  B[0] = 1.0 / (h * h);
  const CMatX pencil = s * CMatX::Identity(k, k) - A.cast<Complex>();
  const CVecX sol = pencil.partialPivLu().solve(B.cast<Complex>());
  CHECK(std::abs(via_param(0, 0) - sol[k - 1]) <= 1e-11 * std::abs(sol[k - 1]));
}

TEST_CASE("fhn dimensions and QB lift order") {
  FhnOptions opts;
  opts.k = 100;
  const PolynomialSystem sys = make_fhn(opts);
  CHECK(sys.n == 200);
  CHECK(sys.m == 2);
  CHECK(sys.q == 2);
  CHECK(sys.H.count(2) == 1);
  CHECK(sys.H.count(3) == 1);

  const PolynomialSystem qb = lift_cubic_to_qb(sys);
  CHECK(qb.n == 300);
  CHECK(qb.d == 2);
}

TEST_CASE("fhn w-equation has the documented steady state") {
  FhnOptions opts;
  opts.k = 10;
  const PolynomialSystem sys = make_fhn(opts);
  // w rows: w' = coupling·v - gamma·w + q; with v ≡ 0 the steady state is q/gamma.
  const Index wrow = opts.k;  // first w node
  const double gamma = -MatX(sys.A)(wrow, wrow);
  const double q = MatX(sys.B)(wrow, 1);
  CHECK(gamma == doctest::Approx(2.0));
  CHECK(q / gamma == doctest::Approx(0.025));
}

TEST_CASE("full-order fhn exhibits the limit-cycle proxy") {
  FhnOptions opts;
  opts.k = 60;  // desk-scale grid keeps this test quick
  const PolynomialSystem sys = make_fhn(opts);
  IntegrateOptions io;
  io.rtol = io.atol = 1e-7;
  const Trajectory traj =
      integrate(sys, InputSignal::fhn_stimulus(opts.stimulus_amplitude, opts.stimulus_decay),
                10.0, io);
  REQUIRE(!traj.diverged);
  CHECK(limit_cycle_proxy(traj, 0, 2.0));
}

TEST_CASE("benchmark spec factory") {
  const BenchmarkSpec chafee = BenchmarkSpec::by_name("chafee", 0);
  CHECK(chafee.grid == 500);
  CHECK(chafee.default_end_time() == doctest::Approx(5.0));
  CHECK(chafee.default_input().name() == "u1");

  const BenchmarkSpec fhn = BenchmarkSpec::by_name("fhn", 50);
  CHECK(fhn.grid == 50);
  CHECK(fhn.default_end_time() == doctest::Approx(10.0));
  CHECK_THROWS(BenchmarkSpec::by_name("nope", 0));
  CHECK_THROWS(fhn.build_parametric());
}

TEST_CASE("chafee Hadamard evaluation equals the explicit cubic unfolding") {
  std::mt19937 rng(91);
  const PolynomialSystem sys = make_chafee(10);
  const UnfoldingMat H3 = explicit_unfolding(sys.H.at(3).terms.front());
  for (int rep = 0; rep < 10; ++rep) {
    const VecX x = oracle::random_vec(10, rng);
    const VecX u = oracle::random_vec(1, rng);
    const VecX via_h = sys.rhs(x, u);
    PolynomialSystem esys = sys;
    esys.H.at(3).terms.clear();
    esys.H.at(3).unfolding = H3;
    const VecX via_e = esys.rhs(x, u);
    CHECK((via_h - via_e).norm() <= 1e-12 * (1.0 + via_h.norm()));
  }
}
