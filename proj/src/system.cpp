#include "polymor/system.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace polymor {

void HadamardTerm::validate() const {
  if (factors.empty()) throw std::invalid_argument("HadamardTerm: no factors");
  const Index n = factors.front().rows();
  for (const auto& f : factors)
    if (f.rows() != n || f.cols() != n)
      throw std::invalid_argument("HadamardTerm: factors must be square with equal size");
}

VecX HadamardTerm::evaluate(const VecX& x) const {
  VecX acc = factors.front() * x;
  for (std::size_t k = 1; k < factors.size(); ++k) acc = acc.cwiseProduct(VecX(factors[k] * x));
  return coefficient * acc;
}

CVecX HadamardTerm::evaluate(const CVecX& x) const {
  CVecX acc = spmul(factors.front(), x);
  for (std::size_t k = 1; k < factors.size(); ++k) acc = acc.cwiseProduct(CVecX(spmul(factors[k], x)));
  return coefficient * acc;
}

UnfoldingMat explicit_unfolding(const HadamardTerm& term, std::int64_t column_cap) {
  term.validate();
  const Index n = term.dim();
  const int xi = term.degree();
  std::int64_t cols = 1;
  for (int k = 0; k < xi; ++k) {
    cols *= n;
    if (cols > column_cap)
      throw std::runtime_error("explicit_unfolding: n^xi exceeds the column cap");
  }

  // Row i is coefficient * (A_1(i,:) ⊗ ... ⊗ A_xi(i,:)); iterate the nonzero
  // combinations of the factor rows.
  std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> rm;
  rm.reserve(term.factors.size());
  for (const auto& f : term.factors) rm.emplace_back(f);

  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  using RmIt = Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator;
  for (Index i = 0; i < n; ++i) {
    std::vector<std::pair<std::int64_t, double>> acc{{0, term.coefficient}};
    for (int k = 0; k < xi && !acc.empty(); ++k) {
      std::vector<std::pair<std::int64_t, double>> next;
      for (RmIt it(rm[k], i); it; ++it)
        for (const auto& [c, v] : acc) next.emplace_back(c * n + it.col(), v * it.value());
      acc.swap(next);
    }
    for (const auto& [c, v] : acc) trip.emplace_back(i, c, v);
  }

  UnfoldingMat out(n, cols);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void PolynomialSystem::validate(bool check_E_invertible) const {
  if (n <= 0 || m <= 0 || q <= 0 || d < 1)
    throw std::invalid_argument("PolynomialSystem: bad dimensions");
  auto expect = [](const auto& M, Index r, Index c, const char* name) {
    if (M.rows() != r || M.cols() != c)
      throw std::invalid_argument(std::string("PolynomialSystem: bad shape for ") + name);
  };
  expect(E, n, n, "E");
  expect(A, n, n, "A");
  expect(B, n, m, "B");
  expect(C, q, n, "C");
  for (const auto& [xi, nl] : H) {
    if (xi < 2 || xi > d) throw std::invalid_argument("PolynomialSystem: H degree out of range");
    std::int64_t cols = 1;
    for (int k = 0; k < xi; ++k) cols *= n;
    for (const auto& t : nl.terms) {
      t.validate();
      if (t.dim() != n || t.degree() != xi)
        throw std::invalid_argument("PolynomialSystem: Hadamard term shape mismatch");
    }
    if (nl.unfolding && (nl.unfolding->rows() != n || nl.unfolding->cols() != cols))
      throw std::invalid_argument("PolynomialSystem: H unfolding shape mismatch");
  }
  for (const auto& [eta, Ne] : N) {
    if (eta < 1 || eta > d) throw std::invalid_argument("PolynomialSystem: N degree out of range");
    std::int64_t cols = m;
    for (int k = 0; k < eta; ++k) cols *= n;
    if (Ne.rows() != n || Ne.cols() != cols)
      throw std::invalid_argument("PolynomialSystem: N shape mismatch");
  }
  if (check_E_invertible) {
    Eigen::SparseLU<SpMat> lu(E);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("PolynomialSystem: E is not invertible (factorization failed)");
  }
}

UnfoldingMat PolynomialSystem::input_slice(int eta, Index j) const {
  const auto it = N.find(eta);
  if (it == N.end()) throw std::invalid_argument("input_slice: no such N term");
  std::int64_t width = 1;
  for (int k = 0; k < eta; ++k) width *= n;
  const std::int64_t lo = j * width;
  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  for (Index i = 0; i < n; ++i)
    for (UnfoldingMat::InnerIterator nz(it->second, i); nz; ++nz)
      if (nz.index() >= lo && nz.index() < lo + width)
        trip.emplace_back(i, nz.index() - lo, nz.value());
  UnfoldingMat out(n, width);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

namespace {

// H_xi · x^(⊗xi) for an explicit unfolding, evaluated per nonzero.
VecX unfolding_apply_pow(const UnfoldingMat& Hm, const VecX& x, int xi) {
  const Index n = x.size();
  VecX out = VecX::Zero(Hm.rows());
  for (Index i = 0; i < Hm.rows(); ++i) {
    double acc = 0;
    for (UnfoldingMat::InnerIterator it(Hm, i); it; ++it) {
      std::int64_t c = it.index();
      double prod = it.value();
      for (int k = 0; k < xi; ++k) {
        prod *= x[static_cast<Index>(c % n)];
        c /= n;
      }
      acc += prod;
    }
    out[i] = acc;
  }
  return out;
}

// d/dx of the above: per nonzero, each digit slot contributes to one column.
void unfolding_pow_jacobian(const UnfoldingMat& Hm, const VecX& x, int xi, double scale,
                            std::vector<Eigen::Triplet<double>>& trip) {
  const Index n = x.size();
  std::vector<Index> digit(xi);
  for (Index i = 0; i < Hm.rows(); ++i) {
    for (UnfoldingMat::InnerIterator it(Hm, i); it; ++it) {
      std::int64_t c = it.index();
      for (int k = xi - 1; k >= 0; --k) {
        digit[k] = static_cast<Index>(c % n);
        c /= n;
      }
      for (int slot = 0; slot < xi; ++slot) {
        double prod = scale * it.value();
        for (int k = 0; k < xi; ++k)
          if (k != slot) prod *= x[digit[k]];
        trip.emplace_back(static_cast<int>(i), static_cast<int>(digit[slot]), prod);
      }
    }
  }
}

void hadamard_jacobian(const HadamardTerm& t, const VecX& x,
                       std::vector<Eigen::Triplet<double>>& trip) {
  const int xi = t.degree();
  std::vector<VecX> y(xi);
  for (int k = 0; k < xi; ++k) y[k] = t.factors[k] * x;
  for (int j = 0; j < xi; ++j) {
    VecX w = VecX::Constant(t.dim(), t.coefficient);
    for (int l = 0; l < xi; ++l)
      if (l != j) w = w.cwiseProduct(y[l]);
    for (Index col = 0; col < t.factors[j].outerSize(); ++col)
      for (SpMat::InnerIterator it(t.factors[j], col); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(col),
                          w[it.row()] * it.value());
  }
}

}  // namespace

VecX PolynomialSystem::rhs(const VecX& x, const VecX& u) const {
  if (x.size() != n || u.size() != m) throw std::invalid_argument("rhs: dimension mismatch");
  VecX out = A * x + B * u;
  for (const auto& [xi, nl] : H) {
    if (nl.has_hadamard()) {
      for (const auto& t : nl.terms) out += t.evaluate(x);
    } else if (nl.has_unfolding()) {
      out += unfolding_apply_pow(*nl.unfolding, x, xi);
    }
  }
  for (const auto& [eta, Ne] : N) {
    std::int64_t width = 1;
    for (int k = 0; k < eta; ++k) width *= n;
    for (Index i = 0; i < n; ++i) {
      double acc = 0;
      for (UnfoldingMat::InnerIterator it(Ne, i); it; ++it) {
        const Index ju = static_cast<Index>(it.index() / width);
        std::int64_t c = it.index() % width;
        double prod = it.value() * u[ju];
        for (int k = 0; k < eta; ++k) {
          prod *= x[static_cast<Index>(c % n)];
          c /= n;
        }
        acc += prod;
      }
      out[i] += acc;
    }
  }
  return out;
}

SpMat PolynomialSystem::jacobian(const VecX& x, const VecX& u) const {
  if (x.size() != n || u.size() != m) throw std::invalid_argument("jacobian: dimension mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  for (Index col = 0; col < A.outerSize(); ++col)
    for (SpMat::InnerIterator it(A, col); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());

  for (const auto& [xi, nl] : H) {
    if (nl.has_hadamard()) {
      for (const auto& t : nl.terms) hadamard_jacobian(t, x, trip);
    } else if (nl.has_unfolding()) {
      unfolding_pow_jacobian(*nl.unfolding, x, xi, 1.0, trip);
    }
  }

  for (const auto& [eta, Ne] : N) {
    std::int64_t width = 1;
    for (int k = 0; k < eta; ++k) width *= n;
    std::vector<Index> digit(eta);
    for (Index i = 0; i < n; ++i) {
      for (UnfoldingMat::InnerIterator it(Ne, i); it; ++it) {
        const Index ju = static_cast<Index>(it.index() / width);
        std::int64_t c = it.index() % width;
        for (int k = eta - 1; k >= 0; --k) {
          digit[k] = static_cast<Index>(c % n);
          c /= n;
        }
        for (int slot = 0; slot < eta; ++slot) {
          double prod = it.value() * u[ju];
          for (int k = 0; k < eta; ++k)
            if (k != slot) prod *= x[digit[k]];
          trip.emplace_back(static_cast<int>(i), static_cast<int>(digit[slot]), prod);
        }
      }
    }
  }

  SpMat J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double CoefficientFn::operator()(const VecX& p) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::ParamComponent:
      if (component < 0 || component >= p.size())
        throw std::invalid_argument("CoefficientFn: parameter component out of range");
      return p[component];
    case Kind::Callback:
      if (!fn) throw std::runtime_error("CoefficientFn: callback '" + name + "' not bound");
      return fn(p);
  }
  return 0.0;
}

CoefficientFn CoefficientFn::one() { return CoefficientFn{}; }

CoefficientFn CoefficientFn::param(int component) {
  CoefficientFn c;
  c.kind = Kind::ParamComponent;
  c.component = component;
  return c;
}

CoefficientFn CoefficientFn::callback(std::string name, std::function<double(const VecX&)> fn) {
  CoefficientFn c;
  c.kind = Kind::Callback;
  c.name = std::move(name);
  c.fn = std::move(fn);
  return c;
}

bool AffineParametricSystem::in_box(const VecX& p) const {
  if (p.size() != np) return false;
  for (Index i = 0; i < np; ++i)
    if (p[i] < box_lo[i] || p[i] > box_hi[i]) return false;
  return true;
}

PolynomialSystem AffineParametricSystem::assemble_at(const VecX& p) const {
  if (p.size() != np)
    throw std::invalid_argument("assemble_at: parameter vector has wrong length");
  if (!in_box(p))
    std::cerr << "polymor: warning: parameter outside the declared box (extrapolating)\n";

  auto sum_sparse = [&](const auto& terms, Index rows, Index cols) {
    using M = std::decay_t<decltype(terms.front().value)>;
    M acc(rows, cols);
    for (const auto& t : terms) {
      const double a = t.alpha(p);
      if (a != 0.0) acc = (acc + M(a * t.value)).pruned();
    }
    return acc;
  };

  PolynomialSystem sys;
  sys.n = n;
  sys.m = m;
  sys.q = q;
  sys.d = d;
  sys.E = sum_sparse(E_terms, n, n);
  sys.A = sum_sparse(A_terms, n, n);
  sys.B = sum_sparse(B_terms, n, m);
  sys.C = sum_sparse(C_terms, q, n);

  for (const auto& [xi, terms] : H_terms) {
    PolynomialNonlinearity nl;
    for (const auto& t : terms) {
      const double a = t.alpha(p);
      for (HadamardTerm h : t.value.terms) {
        h.coefficient *= a;
        nl.terms.push_back(std::move(h));
      }
      if (t.value.unfolding) {
        UnfoldingMat scaled = a * (*t.value.unfolding);
        if (nl.unfolding)
          *nl.unfolding = *nl.unfolding + scaled;
        else
          nl.unfolding = std::move(scaled);
      }
    }
    sys.H[xi] = std::move(nl);
  }
  for (const auto& [eta, terms] : N_terms) {
    std::int64_t cols = m;
    for (int k = 0; k < eta; ++k) cols *= n;
    UnfoldingMat acc(n, cols);
    for (const auto& t : terms) {
      const double a = t.alpha(p);
      if (a != 0.0) acc = acc + UnfoldingMat(a * t.value);
    }
    sys.N[eta] = std::move(acc);
  }
  return sys;
}

namespace {

bool is_diagonal(const SpMat& M) {
  for (Index col = 0; col < M.outerSize(); ++col)
    for (SpMat::InnerIterator it(M, col); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

}  // namespace

PolynomialSystem lift_cubic_to_qb(const PolynomialSystem& sys) {
  if (!sys.N.empty())
    throw std::runtime_error("lift_cubic_to_qb: systems with N terms are not supported");
  const auto h3 = sys.H.find(3);
  if (h3 == sys.H.end() || !h3->second.has_hadamard())
    throw std::runtime_error("lift_cubic_to_qb: no Hadamard-form cubic term");
  if (!is_diagonal(sys.E))
    throw std::runtime_error("lift_cubic_to_qb: E must be diagonal");

  // All cubic terms must share one diagonal factor D.
  const SpMat& D = h3->second.terms.front().factors.front();
  if (!is_diagonal(D)) throw std::runtime_error("lift_cubic_to_qb: cubic factor is not diagonal");
  double c3 = 0.0;
  for (const auto& t : h3->second.terms) {
    for (const auto& f : t.factors)
      if (!f.isApprox(D))
        throw std::runtime_error("lift_cubic_to_qb: cubic factors differ (unsupported lift)");
    c3 += t.coefficient;
  }

  const Index n = sys.n;
  VecX ddiag = VecX(D.diagonal());
  VecX ediag = VecX(sys.E.diagonal());
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i)
    if (ddiag[i] != 0.0) support.push_back(i);
  const Index ks = static_cast<Index>(support.size());
  const Index nn = n + ks;

  std::vector<const HadamardTerm*> quad_terms;
  if (auto h2 = sys.H.find(2); h2 != sys.H.end()) {
    if (!h2->second.has_hadamard())
      throw std::runtime_error("lift_cubic_to_qb: explicit-only quadratic term unsupported");
    for (const auto& t : h2->second.terms) {
      for (const auto& f : t.factors)
        if (!is_diagonal(f))
          throw std::runtime_error("lift_cubic_to_qb: quadratic factors must be diagonal");
      quad_terms.push_back(&t);
    }
  }

  auto embed_top = [&](const SpMat& M) {
    std::vector<Eigen::Triplet<double>> trip;
    for (Index col = 0; col < M.outerSize(); ++col)
      for (SpMat::InnerIterator it(M, col); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    SpMat out(nn, nn);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  };

  PolynomialSystem qb;
  qb.n = nn;
  qb.m = sys.m;
  qb.q = sys.q;
  qb.d = 2;

  {
    std::vector<Eigen::Triplet<double>> te, ta, tb, tc;
    for (Index col = 0; col < sys.E.outerSize(); ++col)
      for (SpMat::InnerIterator it(sys.E, col); it; ++it)
        te.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    for (Index j = 0; j < ks; ++j) te.emplace_back(static_cast<int>(n + j), static_cast<int>(n + j), 1.0);
    for (Index col = 0; col < sys.A.outerSize(); ++col)
      for (SpMat::InnerIterator it(sys.A, col); it; ++it)
        ta.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    for (Index col = 0; col < sys.B.outerSize(); ++col)
      for (SpMat::InnerIterator it(sys.B, col); it; ++it)
        tb.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    for (Index col = 0; col < sys.C.outerSize(); ++col)
      for (SpMat::InnerIterator it(sys.C, col); it; ++it)
        tc.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    qb.E.resize(nn, nn);
    qb.E.setFromTriplets(te.begin(), te.end());
    qb.A.resize(nn, nn);
    qb.A.setFromTriplets(ta.begin(), ta.end());
    qb.B.resize(nn, sys.m);
    qb.B.setFromTriplets(tb.begin(), tb.end());
    qb.C.resize(sys.q, nn);
    qb.C.setFromTriplets(tc.begin(), tc.end());
  }

  PolynomialNonlinearity quad;

  // Original quadratic terms, embedded.
  for (const auto* t : quad_terms) {
    HadamardTerm h;
    h.coefficient = t->coefficient;
    for (const auto& f : t->factors) h.factors.push_back(embed_top(f));
    quad.terms.push_back(std::move(h));
  }

  // Cubic term rewritten as (D x) ∘ z on the original rows.
  {
    HadamardTerm h;
    h.coefficient = c3;
    h.factors.push_back(embed_top(D));
    std::vector<Eigen::Triplet<double>> pick;
    for (Index j = 0; j < ks; ++j)
      pick.emplace_back(static_cast<int>(support[j]), static_cast<int>(n + j), 1.0);
    SpMat F2(nn, nn);
    F2.setFromTriplets(pick.begin(), pick.end());
    h.factors.push_back(std::move(F2));
    quad.terms.push_back(std::move(h));
  }

  VecX beta(ks);
  for (Index j = 0; j < ks; ++j) {
    const Index i = support[j];
    beta[j] = 2.0 * ddiag[i] * ddiag[i] / ediag[i];
  }

  // z' rows: beta·x_i·(A x)_i.
  {
    HadamardTerm h;
    h.coefficient = 1.0;
    std::vector<Eigen::Triplet<double>> tp, tq;
    Eigen::SparseMatrix<double, Eigen::RowMajor> Arm(sys.A);
    for (Index j = 0; j < ks; ++j) {
      const Index i = support[j];
      tp.emplace_back(static_cast<int>(n + j), static_cast<int>(i), beta[j]);
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arm, i); it; ++it)
        tq.emplace_back(static_cast<int>(n + j), static_cast<int>(it.col()), it.value());
    }
    SpMat P(nn, nn), Q(nn, nn);
    P.setFromTriplets(tp.begin(), tp.end());
    Q.setFromTriplets(tq.begin(), tq.end());
    h.factors = {std::move(P), std::move(Q)};
    quad.terms.push_back(std::move(h));
  }

  // z' rows from each original quadratic term: beta·c_t·(d1 d2/d²)·x_i·z_j.
  for (const auto* t : quad_terms) {
    VecX f1 = VecX(t->factors[0].diagonal());
    VecX f2 = VecX(t->factors[1].diagonal());
    std::vector<Eigen::Triplet<double>> tp, tq;
    bool any = false;
    for (Index j = 0; j < ks; ++j) {
      const Index i = support[j];
      const double s = f1[i] * f2[i];
      if (s == 0.0) continue;
      any = true;
      tp.emplace_back(static_cast<int>(n + j), static_cast<int>(i),
                      beta[j] * t->coefficient * s / (ddiag[i] * ddiag[i]));
      tq.emplace_back(static_cast<int>(n + j), static_cast<int>(n + j), 1.0);
    }
    if (!any) continue;
    HadamardTerm h;
    h.coefficient = 1.0;
    SpMat P(nn, nn), Q(nn, nn);
    P.setFromTriplets(tp.begin(), tp.end());
    Q.setFromTriplets(tq.begin(), tq.end());
    h.factors = {std::move(P), std::move(Q)};
    quad.terms.push_back(std::move(h));
  }

  // z' rows from the cubic term: (beta·c3/d)·z_j².
  {
    std::vector<Eigen::Triplet<double>> tp, tq;
    for (Index j = 0; j < ks; ++j) {
      const Index i = support[j];
      tp.emplace_back(static_cast<int>(n + j), static_cast<int>(n + j), beta[j] * c3 / ddiag[i]);
      tq.emplace_back(static_cast<int>(n + j), static_cast<int>(n + j), 1.0);
    }
    HadamardTerm h;
    h.coefficient = 1.0;
    SpMat P(nn, nn), Q(nn, nn);
    P.setFromTriplets(tp.begin(), tp.end());
    Q.setFromTriplets(tq.begin(), tq.end());
    h.factors = {std::move(P), std::move(Q)};
    quad.terms.push_back(std::move(h));
  }

  qb.H[2] = std::move(quad);

  // z' rows from the input: beta·B(i,l)·u_l·x_i.
  {
    std::vector<Eigen::Triplet<double, std::int64_t>> tn;
    Eigen::SparseMatrix<double, Eigen::RowMajor> Brm(sys.B);
    for (Index j = 0; j < ks; ++j) {
      const Index i = support[j];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Brm, i); it; ++it)
        tn.emplace_back(n + j, static_cast<std::int64_t>(it.col()) * nn + i,
                        beta[j] * it.value());
    }
    if (!tn.empty()) {
      UnfoldingMat N1(nn, static_cast<std::int64_t>(sys.m) * nn);
      N1.setFromTriplets(tn.begin(), tn.end());
      qb.N[1] = std::move(N1);
    }
  }

  return qb;
}

}  // namespace polymor
