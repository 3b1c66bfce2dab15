#include "polymor/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "polymor/kron.hpp"

namespace polymor {

namespace {

bool close(Complex a, Complex b) {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

bool has_conjugate(const std::vector<Complex>& pts, Complex s) {
  return std::any_of(pts.begin(), pts.end(), [&](Complex t) { return close(t, std::conj(s)); });
}

}  // namespace

void InterpolationSet::validate(Index m_inputs, Index q_outputs, Index np) const {
  if (sigma.empty()) throw std::invalid_argument("InterpolationSet: no frequency points");
  for (const Complex s : sigma)
    if (s.imag() != 0.0 && !has_conjugate(sigma, s))
      throw std::invalid_argument("InterpolationSet: sigma set not closed under conjugation");
  if (mode == Mode::SisoGeneral) {
    if (mu.size() != sigma.size())
      throw std::invalid_argument("InterpolationSet: need one mu per sigma");
    for (const Complex s : mu)
      if (s.imag() != 0.0 && !has_conjugate(mu, s))
        throw std::invalid_argument("InterpolationSet: mu set not closed under conjugation");
  }
  if (mode == Mode::Tangential || mode == Mode::ParametricTangential) {
    if (b.size() != sigma.size() || c.size() != sigma.size())
      throw std::invalid_argument("InterpolationSet: tangential modes need |b| = |c| = |sigma|");
    for (const auto& bi : b)
      if (bi.size() != m_inputs || bi.norm() == 0.0)
        throw std::invalid_argument("InterpolationSet: bad right tangential direction");
    for (const auto& ci : c)
      if (ci.size() != q_outputs || ci.norm() == 0.0)
        throw std::invalid_argument("InterpolationSet: bad left tangential direction");
  }
  if (mode == Mode::ParametricTangential) {
    if (p.size() != sigma.size())
      throw std::invalid_argument("InterpolationSet: need one parameter point per sigma");
    for (const auto& pi : p)
      if (pi.size() != np)
        throw std::invalid_argument("InterpolationSet: parameter point has wrong length");
  }
}

std::vector<Complex> log_spaced_frequencies(double lo, double hi, int count) {
  if (lo <= 0 || hi <= lo || count < 1)
    throw std::invalid_argument("log_spaced_frequencies: need 0 < lo < hi and count >= 1");
  std::vector<Complex> pts(count);
  if (count == 1) {
    pts[0] = Complex(lo, 0);
    return pts;
  }
  const double la = std::log10(lo), lb = std::log10(hi);
  for (int i = 0; i < count; ++i)
    pts[i] = Complex(std::pow(10.0, la + (lb - la) * i / (count - 1)), 0.0);
  return pts;
}

std::vector<VecX> uniform_parameter_points(const VecX& lo, const VecX& hi, int count,
                                           unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<VecX> pts(count);
  for (int i = 0; i < count; ++i) {
    VecX p(lo.size());
    for (Index j = 0; j < lo.size(); ++j) p[j] = lo[j] + (hi[j] - lo[j]) * unif(rng);
    pts[i] = p;
  }
  return pts;
}

InterpolationSet load_interpolation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interpolation CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty interpolation CSV");

  std::vector<std::string> names;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) names.push_back(tok);
  }
  auto find = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int i_sre = find("sigma_re"), i_sim = find("sigma_im");
  const int i_mre = find("mu_re"), i_mim = find("mu_im");
  if (i_sre < 0) throw std::runtime_error("interpolation CSV needs a sigma_re column");
  std::vector<int> ip, ib, ic;
  for (int k = 1;; ++k) {
    const int idx = find("p_" + std::to_string(k));
    if (idx < 0) break;
    ip.push_back(idx);
  }
  for (int k = 1;; ++k) {
    const int idx = find("b_" + std::to_string(k));
    if (idx < 0) break;
    ib.push_back(idx);
  }
  for (int k = 1;; ++k) {
    const int idx = find("c_" + std::to_string(k));
    if (idx < 0) break;
    ic.push_back(idx);
  }

  InterpolationSet iset;
  iset.mode = !ip.empty() ? InterpolationSet::Mode::ParametricTangential
              : (i_mre >= 0 ? InterpolationSet::Mode::SisoGeneral
                            : InterpolationSet::Mode::Tangential);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
    auto get = [&](int idx) { return idx >= 0 ? vals.at(idx) : 0.0; };
    iset.sigma.emplace_back(get(i_sre), get(i_sim));
    if (i_mre >= 0) iset.mu.emplace_back(get(i_mre), get(i_mim));
    if (!ip.empty()) {
      VecX p(static_cast<Index>(ip.size()));
      for (std::size_t k = 0; k < ip.size(); ++k) p[static_cast<Index>(k)] = vals.at(ip[k]);
      iset.p.push_back(p);
    }
    if (!ib.empty()) {
      CVecX b(static_cast<Index>(ib.size()));
      for (std::size_t k = 0; k < ib.size(); ++k) b[static_cast<Index>(k)] = vals.at(ib[k]);
      iset.b.push_back(b);
    }
    if (!ic.empty()) {
      CVecX c(static_cast<Index>(ic.size()));
      for (std::size_t k = 0; k < ic.size(); ++k) c[static_cast<Index>(k)] = vals.at(ic[k]);
      iset.c.push_back(c);
    }
  }
  return iset;
}

namespace {

void default_directions_from(const CMatX& F, Index m, Index q, CVecX& b, CVecX& c) {
  if (m == 1 && q == 1) {
    b = CVecX::Ones(1);
    c = CVecX::Ones(1);
    return;
  }
  Eigen::JacobiSVD<CMatX> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  b = svd.matrixV().col(0);
  c = svd.matrixU().col(0).conjugate();
}

}  // namespace

void fill_default_directions(InterpolationSet& iset, const PolynomialSystem& sys) {
  if (!iset.b.empty() && !iset.c.empty()) return;
  iset.b.assign(iset.sigma.size(), CVecX());
  iset.c.assign(iset.sigma.size(), CVecX());
  PhiCache cache(sys);
  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    const CMatX F = eval_FL(cache, iset.sigma[i]);
    default_directions_from(F, sys.m, sys.q, iset.b[i], iset.c[i]);
  }
}

void fill_default_directions(InterpolationSet& iset, const AffineParametricSystem& psys) {
  if (!iset.b.empty() && !iset.c.empty()) return;
  iset.b.assign(iset.sigma.size(), CVecX());
  iset.c.assign(iset.sigma.size(), CVecX());
  ParametricEvaluator ev(psys);
  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    const CMatX F = ev.eval_FL(iset.sigma[i], iset.p.at(i));
    default_directions_from(F, psys.m, psys.q, iset.b[i], iset.c[i]);
  }
}

namespace {

// Lazily built mode-2 matricizations for explicit H unfoldings and N slices.
struct Mode2Cache {
  const PolynomialSystem* sys;
  std::map<int, ModeUnfolding> h2;
  std::map<std::pair<int, Index>, ModeUnfolding> n2;

  const ModeUnfolding& h(int xi) {
    auto it = h2.find(xi);
    if (it == h2.end()) {
      ModeUnfolding m1;
      m1.data = *sys->H.at(xi).unfolding;
      m1.dims.assign(static_cast<std::size_t>(xi) + 1, sys->n);
      m1.mode = 1;
      it = h2.emplace(xi, mode2_from_mode1(m1)).first;
    }
    return it->second;
  }

  const ModeUnfolding& n_slice(int eta, Index j) {
    auto key = std::make_pair(eta, j);
    auto it = n2.find(key);
    if (it == n2.end()) {
      ModeUnfolding m1;
      m1.data = sys->input_slice(eta, j);
      m1.dims.assign(static_cast<std::size_t>(eta) + 1, sys->n);
      m1.mode = 1;
      it = n2.emplace(key, mode2_from_mode1(m1)).first;
    }
    return it->second;
  }
};

// H_xi (g_{λ_xi} ⊗ ... ⊗ g_{λ_1}) with g[j] = Φ(λ_{j+1}) B b.
CVecX apply_H_vec(const PolynomialSystem& sys, int xi, const std::vector<CVecX>& g) {
  const auto& nl = sys.H.at(xi);
  if (nl.has_hadamard()) {
    CVecX acc = CVecX::Zero(sys.n);
    for (const auto& t : nl.terms) {
      CVecX prod = spmul(t.factors[0], g[xi - 1]);
      for (int l = 1; l < xi; ++l)
        prod = prod.cwiseProduct(CVecX(spmul(t.factors[l], g[xi - 1 - l])));
      acc += t.coefficient * prod;
    }
    return acc;
  }
  std::vector<Index> slots(xi, sys.n);
  std::vector<CMatX> fac(g.rbegin(), g.rend());
  return kron_contract(*nl.unfolding, slots, fac).col(0);
}

// N^{(slice)} (g_{λ_eta} ⊗ ... ⊗ g_{λ_1}).
CVecX apply_N_slice_vec(const PolynomialSystem& sys, int eta, Index slice,
                        const std::vector<CVecX>& g) {
  std::vector<Index> slots(eta, sys.n);
  std::vector<CMatX> fac(g.rbegin(), g.rend());
  return kron_contract(sys.input_slice(eta, slice), slots, fac).col(0);
}

// (H_xi)_(2) (g_{λ_xi} ⊗ ... ⊗ g_{λ_2} ⊗ w) with g2[k] = g_{λ_{k+2}}.
CVecX apply_H_mode2_vec(const PolynomialSystem& sys, Mode2Cache& m2, int xi,
                        const std::vector<CVecX>& g2, const CVecX& w) {
  const auto& nl = sys.H.at(xi);
  if (nl.has_hadamard()) {
    CVecX acc = CVecX::Zero(sys.n);
    for (const auto& t : nl.terms) {
      CVecX prod = w;
      for (int k = 0; k < xi - 1; ++k)
        prod = prod.cwiseProduct(CVecX(spmul(t.factors[xi - 2 - k], g2[k])));
      acc += t.coefficient * spmul_transpose(t.factors[xi - 1], prod);
    }
    return acc;
  }
  std::vector<Index> slots(xi, sys.n);
  std::vector<CMatX> fac;
  for (int k = xi - 2; k >= 0; --k) fac.push_back(g2[k]);
  fac.push_back(w);
  return kron_contract(m2.h(xi).data, slots, fac).col(0);
}

// (N^{(slice)})_(2) (g_{λ_eta} ⊗ ... ⊗ g_{λ_2} ⊗ w).
CVecX apply_N_mode2_vec(const PolynomialSystem& sys, Mode2Cache& m2, int eta, Index slice,
                        const std::vector<CVecX>& g2, const CVecX& w) {
  std::vector<Index> slots(eta, sys.n);
  std::vector<CMatX> fac;
  for (int k = eta - 2; k >= 0; --k) fac.push_back(g2[k]);
  fac.push_back(w);
  return kron_contract(m2.n_slice(eta, slice).data, slots, fac).col(0);
}

struct BasisAccumulator {
  std::vector<CVecX> cols;
  std::vector<ColumnProvenance> prov;

  void add(CVecX col, char block, int degree, int point, int slice) {
    ColumnProvenance pr;
    pr.block = block;
    pr.degree = degree;
    pr.point = point;
    pr.slice = slice;
    prov.push_back(pr);
    cols.push_back(std::move(col));
  }
};

void realify(const BasisAccumulator& acc, MatX& out, std::vector<ColumnProvenance>& prov) {
  std::vector<VecX> rcols;
  prov.clear();
  for (std::size_t k = 0; k < acc.cols.size(); ++k) {
    const CVecX& col = acc.cols[k];
    const double scale = col.cwiseAbs().maxCoeff();
    const double imag = col.imag().cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;  // zero directions carry no information
    if (imag <= 1e-13 * scale) {
      rcols.push_back(col.real());
      prov.push_back(acc.prov[k]);
      prov.back().part = 'c';
    } else {
      rcols.push_back(col.real());
      prov.push_back(acc.prov[k]);
      prov.back().part = 'r';
      rcols.push_back(col.imag());
      prov.push_back(acc.prov[k]);
      prov.back().part = 'i';
    }
  }
  if (rcols.empty()) throw std::runtime_error("basis construction produced no columns");
  out.resize(rcols.front().size(), static_cast<Index>(rcols.size()));
  for (std::size_t k = 0; k < rcols.size(); ++k) out.col(static_cast<Index>(k)) = rcols[k];
}

// Columns for one interpolation point of the tangential scheme. The same
// routine serves the parametric case (sys already assembled at p_i).
void tangential_point_columns(const PolynomialSystem& sys, PhiCache& cache, Mode2Cache& m2,
                              int point, Complex sigma, const CVecX& b, const CVecX& c,
                              BasisAccumulator& vacc, BasisAccumulator& wacc) {
  const auto fact = cache.at(sigma);
  const CVecX bvec = spmul(sys.B, CMatX(b)).col(0);
  const CVecX cvec = spmul_transpose(sys.C, CMatX(c)).col(0);
  const CVecX g = fact->solve(bvec);
  const CVecX w = fact->solve_transpose(cvec);

  vacc.add(g, 'L', 1, point, 0);
  wacc.add(w, 'L', 1, point, 0);

  for (const auto& [eta, Ne] : sys.N) {
    const std::vector<CVecX> gs(static_cast<std::size_t>(eta), g);
    const std::vector<CVecX> g2(static_cast<std::size_t>(eta - 1), g);
    for (Index j = 0; j < sys.m; ++j) {
      vacc.add(fact->solve(apply_N_slice_vec(sys, eta, j, gs)), 'N', eta, point,
               static_cast<int>(j));
      wacc.add(fact->solve_transpose(apply_N_mode2_vec(sys, m2, eta, j, g2, w)), 'N', eta, point,
               static_cast<int>(j));
    }
  }
  for (const auto& [xi, nl] : sys.H) {
    if (nl.empty()) continue;
    const std::vector<CVecX> gs(static_cast<std::size_t>(xi), g);
    const std::vector<CVecX> g2(static_cast<std::size_t>(xi - 1), g);
    vacc.add(fact->solve(apply_H_vec(sys, xi, gs)), 'H', xi, point, 0);
    wacc.add(fact->solve_transpose(apply_H_mode2_vec(sys, m2, xi, g2, w)), 'H', xi, point, 0);
  }
}

}  // namespace

RawBases build_bases_tangential(const PolynomialSystem& sys, const InterpolationSet& iset) {
  if (iset.mode != InterpolationSet::Mode::Tangential)
    throw std::invalid_argument("build_bases_tangential: wrong interpolation mode");
  iset.validate(sys.m, sys.q, 0);

  PhiCache cache(sys);
  Mode2Cache m2{&sys, {}, {}};
  BasisAccumulator vacc, wacc;
  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    if (iset.sigma[i].imag() < 0.0) continue;  // conjugate partner carries the same data
    tangential_point_columns(sys, cache, m2, static_cast<int>(i), iset.sigma[i], iset.b[i],
                             iset.c[i], vacc, wacc);
  }
  RawBases out;
  realify(vacc, out.V, out.v_cols);
  realify(wacc, out.W, out.w_cols);
  return out;
}

namespace {

// Enumerates index tuples over {0..count-1}^len.
bool advance_tuple(std::vector<int>& t, int count) {
  for (std::size_t k = t.size(); k-- > 0;) {
    if (++t[k] < count) return true;
    t[k] = 0;
  }
  return false;
}

}  // namespace

RawBases build_bases_siso_general(const PolynomialSystem& sys, const InterpolationSet& iset) {
  if (iset.mode != InterpolationSet::Mode::SisoGeneral)
    throw std::invalid_argument("build_bases_siso_general: wrong interpolation mode");
  if (sys.m != 1 || sys.q != 1)
    throw std::invalid_argument("build_bases_siso_general: system must be SISO");
  iset.validate(1, 1, 0);

  PhiCache cache(sys);
  Mode2Cache m2{&sys, {}, {}};
  const int r = static_cast<int>(iset.sigma.size());
  const CMatX Bc = sys.B.cast<Complex>();
  const CMatX Ct = CMatX(sys.C.cast<Complex>().transpose());

  // Solves per point, reused across blocks.
  std::vector<CVecX> g(r), w(r);
  for (int i = 0; i < r; ++i) {
    g[i] = cache.at(iset.sigma[i])->solve(Bc).col(0);
    w[i] = cache.at(iset.mu[i])->solve_transpose(Ct).col(0);
  }

  if (iset.full_tuples) {
    std::size_t count = 0;
    for (const auto& [eta, Ne] : sys.N) {
      std::size_t c = 1;
      for (int k = 0; k <= eta; ++k) c *= r;
      count += c + c / r * iset.mu.size();
    }
    for (const auto& [xi, nl] : sys.H) {
      std::size_t c = 1;
      for (int k = 0; k <= xi; ++k) c *= r;
      count += c + c / r * iset.mu.size();
    }
    std::cerr << "polymor: warning: full tuple enumeration generates about " << count
              << " extra basis columns\n";
  }

  BasisAccumulator vacc, wacc;
  for (int i = 0; i < r; ++i) {
    if (iset.sigma[i].imag() >= 0.0) vacc.add(g[i], 'L', 1, i, 0);
    if (iset.mu[i].imag() >= 0.0) wacc.add(w[i], 'L', 1, i, 0);
  }

  auto emit_blocks = [&](const std::vector<int>& lam, int left_idx) {
    // lam[j] is the sigma index of λ_{j+1}; left_idx picks β = mu[left_idx].
    for (const auto& [eta, Ne] : sys.N) {
      if (static_cast<int>(lam.size()) != eta + 1) continue;
      std::vector<CVecX> gs(static_cast<std::size_t>(eta));
      for (int k = 0; k < eta; ++k) gs[k] = g[lam[k]];
      vacc.add(cache.at(iset.sigma[lam[eta]])->solve(apply_N_slice_vec(sys, eta, 0, gs)), 'N',
               eta, lam[0], 0);
      std::vector<CVecX> g2(static_cast<std::size_t>(eta - 1));
      for (int k = 0; k < eta - 1; ++k) g2[k] = g[lam[k + 1]];
      wacc.add(cache.at(iset.sigma[lam[0]])
                   ->solve_transpose(apply_N_mode2_vec(sys, m2, eta, 0, g2, w[left_idx])),
               'N', eta, lam[0], 0);
    }
    for (const auto& [xi, nl] : sys.H) {
      if (nl.empty() || static_cast<int>(lam.size()) != xi + 1) continue;
      std::vector<CVecX> gs(static_cast<std::size_t>(xi));
      for (int k = 0; k < xi; ++k) gs[k] = g[lam[k]];
      vacc.add(cache.at(iset.sigma[lam[xi]])->solve(apply_H_vec(sys, xi, gs)), 'H', xi, lam[0],
               0);
      std::vector<CVecX> g2(static_cast<std::size_t>(xi - 1));
      for (int k = 0; k < xi - 1; ++k) g2[k] = g[lam[k + 1]];
      wacc.add(cache.at(iset.sigma[lam[0]])
                   ->solve_transpose(apply_H_mode2_vec(sys, m2, xi, g2, w[left_idx])),
               'H', xi, lam[0], 0);
    }
  };

  std::vector<int> degrees;
  for (const auto& [eta, Ne] : sys.N) degrees.push_back(eta + 1);
  for (const auto& [xi, nl] : sys.H)
    if (!nl.empty()) degrees.push_back(xi + 1);
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());

  if (!iset.full_tuples) {
    // Diagonal tuples: one per point pair (σ_i, μ_i).
    for (int i = 0; i < r; ++i) {
      if (iset.sigma[i].imag() < 0.0) continue;
      for (const int len : degrees) emit_blocks(std::vector<int>(len, i), i);
    }
  } else {
    for (const int len : degrees) {
      std::vector<int> lam(static_cast<std::size_t>(len), 0);
      do {
        for (int li = 0; li < r; ++li) emit_blocks(lam, li);
      } while (advance_tuple(lam, r));
    }
  }

  RawBases out;
  realify(vacc, out.V, out.v_cols);
  realify(wacc, out.W, out.w_cols);
  return out;
}

RawBases build_bases_parametric(const AffineParametricSystem& psys,
                                const InterpolationSet& iset) {
  if (iset.mode != InterpolationSet::Mode::ParametricTangential)
    throw std::invalid_argument("build_bases_parametric: wrong interpolation mode");
  iset.validate(psys.m, psys.q, psys.np);

  ParametricEvaluator ev(psys, /*budget=*/4);
  BasisAccumulator vacc, wacc;
  for (std::size_t i = 0; i < iset.sigma.size(); ++i) {
    if (iset.sigma[i].imag() < 0.0) continue;
    PhiCache& cache = ev.cache_at(iset.p[i]);
    const PolynomialSystem& sys = cache.system();
    Mode2Cache m2{&sys, {}, {}};
    tangential_point_columns(sys, cache, m2, static_cast<int>(i), iset.sigma[i], iset.b[i],
                             iset.c[i], vacc, wacc);
  }
  RawBases out;
  realify(vacc, out.V, out.v_cols);
  realify(wacc, out.W, out.w_cols);
  return out;
}

MatX orth_trim(const MatX& M, double tol) {
  if (M.cols() == 0 || M.rows() == 0) throw std::invalid_argument("orth_trim: empty input");
  Eigen::BDCSVD<MatX> svd(M, Eigen::ComputeThinU);
  const VecX& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) throw std::runtime_error("orth_trim: all-zero input");
  Index r = 0;
  while (r < sv.size() && sv[r] >= tol * sv[0]) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace polymor
