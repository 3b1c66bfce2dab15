#include "polymor/cur.hpp"

#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "polymor/io.hpp"
#include "polymor/kron.hpp"

namespace polymor {

namespace {

MatX pseudo_inverse(const MatX& M, double rel_tol) {
  Eigen::BDCSVD<MatX> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return MatX::Zero(M.cols(), M.rows());
  VecX inv = VecX::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::vector<Index> pivot_order(const MatX& M) {
  Eigen::ColPivHouseholderQR<MatX> qr(M);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Index> order(static_cast<std::size_t>(perm.size()));
  for (Index k = 0; k < perm.size(); ++k) order[static_cast<std::size_t>(k)] = perm[k];
  return order;
}

std::vector<Index> leverage_sample(const MatX& basis, Index count, std::mt19937& rng) {
  // Scores from the row norms of the leading singular-vector block; sampled
  // without replacement.
  VecX scores = basis.rowwise().squaredNorm();
  std::vector<Index> chosen;
  std::vector<Index> pool(static_cast<std::size_t>(scores.size()));
  std::iota(pool.begin(), pool.end(), Index(0));
  for (Index k = 0; k < count; ++k) {
    std::vector<double> w;
    w.reserve(pool.size());
    for (const Index i : pool) w.push_back(std::max(scores[i], 1e-300));
    std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
    const std::size_t pick = dist(rng);
    chosen.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return chosen;
}

}  // namespace

CurSelection cur_decompose(const MatX& M, Index n_c, Index n_r, const CurOptions& opts) {
  if (n_c < 1 || n_c > M.cols() || n_r < 1 || n_r > M.rows())
    throw std::invalid_argument("cur_decompose: selection sizes exceed the matrix dimensions");

  CurSelection sel;
  if (opts.selection == CurOptions::Selection::GreedyPivot) {
    auto corder = pivot_order(M);
    auto rorder = pivot_order(M.transpose());
    sel.cols.assign(corder.begin(), corder.begin() + n_c);
    sel.rows.assign(rorder.begin(), rorder.begin() + n_r);
  } else {
    std::mt19937 rng(opts.seed);
    const Index k = std::min({n_c, n_r, std::min(M.rows(), M.cols())});
    Eigen::BDCSVD<MatX> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sel.cols = leverage_sample(svd.matrixV().leftCols(k), n_c, rng);
    sel.rows = leverage_sample(svd.matrixU().leftCols(k), n_r, rng);
  }

  MatX C(M.rows(), n_c), R(n_r, M.cols());
  for (Index j = 0; j < n_c; ++j) C.col(j) = M.col(sel.cols[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < n_r; ++i) R.row(i) = M.row(sel.rows[static_cast<std::size_t>(i)]);
  sel.U = pseudo_inverse(C, opts.pinv_tol) * M * pseudo_inverse(R, opts.pinv_tol);
  return sel;
}

VecX CurHyperModel::evaluate(const VecX& xhat) const {
  VecX acc = sampled_factor_rows.front() * xhat;
  for (std::size_t j = 1; j < sampled_factor_rows.size(); ++j)
    acc = acc.cwiseProduct(VecX(sampled_factor_rows[j] * xhat));
  return coefficient * (Psi * acc);
}

MatX CurHyperModel::jacobian(const VecX& xhat) const {
  const std::size_t k = sampled_factor_rows.size();
  std::vector<VecX> xt(k);
  for (std::size_t j = 0; j < k; ++j) xt[j] = sampled_factor_rows[j] * xhat;
  MatX J = MatX::Zero(Psi.rows(), xhat.size());
  for (std::size_t j = 0; j < k; ++j) {
    VecX w = VecX::Constant(Psi.cols(), coefficient);
    for (std::size_t l = 0; l < k; ++l)
      if (l != j) w = w.cwiseProduct(xt[l]);
    J += Psi * w.asDiagonal() * sampled_factor_rows[j];
  }
  return J;
}

VecX hyper_rhs(const CurHyperModel& model, const VecX& xhat) { return model.evaluate(xhat); }

CurHyperModel build_hyper(const ReductionResult& result, const ProjectedTerm& term, Index n_c,
                          Index n_r, const CurOptions& opts) {
  const MatX veff_kron = row_kron(term.factors);  // n x r^xi
  const CurSelection sel = cur_decompose(veff_kron, n_c, n_r, opts);

  CurHyperModel model;
  model.xi = term.xi;
  model.coefficient = term.coefficient;
  model.row_indices = sel.rows;

  MatX C(veff_kron.rows(), n_c);
  for (Index j = 0; j < n_c; ++j) C.col(j) = veff_kron.col(sel.cols[static_cast<std::size_t>(j)]);
  model.Psi = result.W_eff.transpose() * C * sel.U;

  for (const MatX& f : term.factors) {
    MatX rows(n_r, f.cols());
    for (Index i = 0; i < n_r; ++i) rows.row(i) = f.row(sel.rows[static_cast<std::size_t>(i)]);
    model.sampled_factor_rows.push_back(std::move(rows));
  }
  return model;
}

VecX HyperReducedSystem::rhs(const VecX& x, const VecX& u) const {
  VecX out = base.rhs(x, u);
  for (const auto& t : terms) out += t.evaluate(x);
  return out;
}

MatX HyperReducedSystem::jacobian(const VecX& x, const VecX& u) const {
  MatX J = base.jacobian(x, u);
  for (const auto& t : terms) J += t.jacobian(x);
  return J;
}

HyperReducedSystem make_hyper_system(const ReductionResult& result, Index n_c, Index n_r,
                                     const CurOptions& opts) {
  if (result.hadamard_projection.empty())
    throw std::invalid_argument(
        "make_hyper_system: the reduction carries no Hadamard-form nonlinear terms");
  HyperReducedSystem hyper;
  hyper.base = result.rom;
  hyper.base.H.clear();
  const Index r = result.rom.r;
  for (const auto& term : result.hadamard_projection) {
    Index cols = 1;
    for (int k = 0; k < term.xi; ++k) cols *= r;
    const Index nc = n_c > 0 ? n_c : std::min<Index>(6 * r, cols);
    const Index nr = n_r > 0 ? n_r : std::min<Index>(6 * r, term.factors.front().rows());
    hyper.terms.push_back(build_hyper(result, term, nc, nr, opts));
  }
  return hyper;
}

Trajectory integrate(const HyperReducedSystem& sys, const InputSignal& u, double T,
                     const IntegrateOptions& opts) {
  DenseOdeModel model;
  model.n = sys.base.r;
  model.m = sys.base.m;
  model.mass = sys.base.E;
  model.output = sys.base.C;
  model.rhs = [&sys](const VecX& x, const VecX& u_) { return sys.rhs(x, u_); };
  model.jacobian = [&sys](const VecX& x, const VecX& u_) { return sys.jacobian(x, u_); };
  return integrate(model, u, T, opts);
}

void save_hyper(const std::filesystem::path& dir, const std::vector<CurHyperModel>& models) {
  std::filesystem::create_directories(dir);
  Manifest man;
  man["terms"] = std::to_string(models.size());
  for (std::size_t t = 0; t < models.size(); ++t) {
    const std::string base = "term" + std::to_string(t);
    man[base + "_xi"] = std::to_string(models[t].xi);
    man[base + "_coefficient"] = format_full(models[t].coefficient);
    write_market_dense(dir / (base + "_Psi.mtx"), models[t].Psi);
    for (std::size_t f = 0; f < models[t].sampled_factor_rows.size(); ++f)
      write_market_dense(dir / (base + "_F" + std::to_string(f) + ".mtx"),
                         models[t].sampled_factor_rows[f]);
    std::ofstream idx(dir / (base + "_rows.csv"));
    idx << "row\n";
    for (const Index i : models[t].row_indices) idx << (i + 1) << '\n';  // 1-based on disk
  }
  write_manifest(dir / "hyper_manifest.txt", man);
}

std::vector<CurHyperModel> load_hyper(const std::filesystem::path& dir) {
  const Manifest man = read_manifest(dir / "hyper_manifest.txt");
  const std::size_t count = std::stoul(man.at("terms"));
  std::vector<CurHyperModel> models;
  for (std::size_t t = 0; t < count; ++t) {
    const std::string base = "term" + std::to_string(t);
    CurHyperModel model;
    model.xi = std::stoi(man.at(base + "_xi"));
    model.coefficient = std::stod(man.at(base + "_coefficient"));
    model.Psi = read_market_dense(dir / (base + "_Psi.mtx"));
    for (int f = 0; f < model.xi; ++f)
      model.sampled_factor_rows.push_back(
          read_market_dense(dir / (base + "_F" + std::to_string(f) + ".mtx")));
    std::ifstream idx(dir / (base + "_rows.csv"));
    std::string line;
    std::getline(idx, line);
    while (std::getline(idx, line))
      if (!line.empty()) model.row_indices.push_back(std::stoll(line) - 1);
    models.push_back(std::move(model));
  }
  return models;
}

}  // namespace polymor
