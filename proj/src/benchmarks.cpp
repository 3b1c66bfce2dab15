#include "polymor/benchmarks.hpp"

#include <stdexcept>

namespace polymor {

namespace {

SpMat sparse_identity(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

// Tridiagonal second-difference block on k nodes; Dirichlet ghost on the
// left, mirrored Neumann ghost on the right.
SpMat chafee_diffusion(Index k, double inv_h2) {
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < k; ++i) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -2.0 * inv_h2);
    if (i > 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(i - 1), inv_h2);
    if (i + 1 < k) trip.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), inv_h2);
  }
  // v_{k+1} = v_{k-1} doubles the subdiagonal entry of the last row.
  trip.emplace_back(static_cast<int>(k - 1), static_cast<int>(k - 2), inv_h2);
  SpMat D(k, k);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

}  // namespace

PolynomialSystem make_chafee(Index k, double L) {
  if (k < 3) throw std::invalid_argument("make_chafee: need at least 3 grid points");
  const double h = L / static_cast<double>(k);
  const double inv_h2 = 1.0 / (h * h);

  PolynomialSystem sys;
  sys.n = k;
  sys.m = 1;
  sys.q = 1;
  sys.d = 3;
  sys.E = sparse_identity(k);
  sys.A = SpMat(chafee_diffusion(k, inv_h2) + sparse_identity(k));

  SpMat B(k, 1);
  B.insert(0, 0) = inv_h2;  // Dirichlet value v(0) = u eliminated into node 1
  sys.B = B;
  SpMat C(1, k);
  C.insert(0, k - 1) = 1.0;  // output v(L)
  sys.C = C;

  HadamardTerm cubic;
  cubic.coefficient = -1.0;
  cubic.factors = {sparse_identity(k), sparse_identity(k), sparse_identity(k)};
  sys.H[3].terms.push_back(std::move(cubic));
  return sys;
}

AffineParametricSystem make_chafee_parametric(Index k, double L) {
  const PolynomialSystem base = make_chafee(k, L);
  const double h = L / static_cast<double>(k);

  AffineParametricSystem psys;
  psys.n = k;
  psys.m = 1;
  psys.q = 1;
  psys.d = 3;
  psys.np = 1;
  psys.box_lo = VecX::Constant(1, 0.25);
  psys.box_hi = VecX::Constant(1, 2.0);

  psys.E_terms.push_back({CoefficientFn::one(), base.E});
  psys.A_terms.push_back({CoefficientFn::one(), chafee_diffusion(k, 1.0 / (h * h))});
  psys.A_terms.push_back({CoefficientFn::param(0), sparse_identity(k)});
  psys.B_terms.push_back({CoefficientFn::one(), base.B});
  psys.C_terms.push_back({CoefficientFn::one(), base.C});

  AffineNonlinearTerm cubic;
  cubic.alpha = CoefficientFn::one();
  cubic.value = base.H.at(3);
  psys.H_terms[3].push_back(std::move(cubic));
  return psys;
}

PolynomialSystem make_fhn(const FhnOptions& opts) {
  const Index k = opts.k;
  if (k < 3) throw std::invalid_argument("make_fhn: need at least 3 grid points");
  const double eps = opts.epsilon;
  const double h = opts.length / static_cast<double>(k - 1);
  const double inv_h2 = 1.0 / (h * h);
  const Index n = 2 * k;

  // v(v - 0.1)(1 - v) = -v^3 + 1.1 v^2 - 0.1 v.
  std::vector<Eigen::Triplet<double>> ta;
  for (Index i = 0; i < k; ++i) {
    // eps * v_xx with mirrored Neumann ghosts at both ends.
    ta.emplace_back(static_cast<int>(i), static_cast<int>(i), -2.0 * eps * inv_h2);
    if (i > 0) ta.emplace_back(static_cast<int>(i), static_cast<int>(i - 1), eps * inv_h2);
    if (i + 1 < k) ta.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), eps * inv_h2);
  }
  ta.emplace_back(0, 1, eps * inv_h2);
  ta.emplace_back(static_cast<int>(k - 1), static_cast<int>(k - 2), eps * inv_h2);
  for (Index i = 0; i < k; ++i) {
    ta.emplace_back(static_cast<int>(i), static_cast<int>(i), -0.1 / eps);          // -0.1 v / eps
    ta.emplace_back(static_cast<int>(i), static_cast<int>(k + i), -1.0 / eps);      // -w / eps
    ta.emplace_back(static_cast<int>(k + i), static_cast<int>(i), opts.coupling);   // h v
    ta.emplace_back(static_cast<int>(k + i), static_cast<int>(k + i), -opts.gamma); // -gamma w
  }
  PolynomialSystem sys;
  sys.n = n;
  sys.m = 2;
  sys.q = 2;
  sys.d = 3;
  sys.E = sparse_identity(n);
  sys.A.resize(n, n);
  sys.A.setFromTriplets(ta.begin(), ta.end());

  SpMat B(n, 2);
  B.insert(0, 0) = eps * 2.0 / h;  // eps^2 (2/h) i0, divided by eps
  for (Index i = 0; i < k; ++i) {
    B.insert(i, 1) = opts.source / eps;
    B.insert(k + i, 1) = opts.source;
  }
  sys.B = B;

  SpMat C(2, n);
  C.insert(0, 0) = 1.0;  // v at the left boundary
  C.insert(1, k) = 1.0;  // w at the left boundary
  sys.C = C;

  SpMat Sv(n, n);
  for (Index i = 0; i < k; ++i) Sv.insert(i, i) = 1.0;

  HadamardTerm cubic;
  cubic.coefficient = -1.0 / eps;
  cubic.factors = {Sv, Sv, Sv};
  sys.H[3].terms.push_back(std::move(cubic));

  HadamardTerm quad;
  quad.coefficient = 1.1 / eps;
  quad.factors = {Sv, Sv};
  sys.H[2].terms.push_back(std::move(quad));
  return sys;
}

BenchmarkSpec BenchmarkSpec::by_name(const std::string& name, Index grid) {
  BenchmarkSpec spec;
  spec.name = name;
  if (name == "chafee" || name == "chafee-param") {
    spec.grid = grid > 0 ? grid : 500;
    spec.length = 1.0;
  } else if (name == "fhn") {
    spec.grid = grid > 0 ? grid : 100;
    spec.length = 0.1;
    spec.fhn.k = spec.grid;
  } else {
    throw std::invalid_argument("unknown benchmark: " + name);
  }
  return spec;
}

double BenchmarkSpec::default_end_time() const { return name == "fhn" ? 10.0 : 5.0; }

InputSignal BenchmarkSpec::default_input() const {
  if (name == "fhn")
    return InputSignal::fhn_stimulus(fhn.stimulus_amplitude, fhn.stimulus_decay);
  return InputSignal::u1();
}

PolynomialSystem BenchmarkSpec::build() const {
  if (name == "chafee") return make_chafee(grid, length);
  if (name == "fhn") {
    FhnOptions o = fhn;
    o.k = grid;
    o.length = length;
    return make_fhn(o);
  }
  throw std::invalid_argument("benchmark '" + name + "' is parametric; use build_parametric");
}

AffineParametricSystem BenchmarkSpec::build_parametric() const {
  if (name != "chafee-param")
    throw std::invalid_argument("benchmark '" + name + "' is not parametric");
  return make_chafee_parametric(grid, length);
}

}  // namespace polymor
