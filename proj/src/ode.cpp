#include "polymor/ode.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace polymor {

InputSignal InputSignal::zero(Index dim) {
  InputSignal s;
  s.dim_ = dim;
  s.name_ = "zero";
  s.eval_ = [dim](double) { return VecX::Zero(dim); };
  return s;
}

InputSignal InputSignal::constant(const VecX& value) {
  InputSignal s;
  s.dim_ = value.size();
  s.name_ = "constant";
  s.eval_ = [value](double) { return value; };
  return s;
}

InputSignal InputSignal::u1() {
  InputSignal s;
  s.dim_ = 1;
  s.name_ = "u1";
  s.eval_ = [](double t) {
    VecX u(1);
    u[0] = 10.0 * (std::sin(M_PI * t) + 1.0);
    return u;
  };
  return s;
}

InputSignal InputSignal::u2() {
  InputSignal s;
  s.dim_ = 1;
  s.name_ = "u2";
  s.eval_ = [](double t) {
    VecX u(1);
    u[0] = 5.0 * t * std::exp(-t);
    return u;
  };
  return s;
}

InputSignal InputSignal::fhn_stimulus(double amplitude, double decay) {
  if (decay <= 0) throw std::invalid_argument("fhn_stimulus: decay must be positive");
  InputSignal s;
  s.dim_ = 2;
  s.name_ = "fhn";
  s.eval_ = [amplitude, decay](double t) {
    VecX u(2);
    u[0] = amplitude * t * t * t * std::exp(-decay * t);
    u[1] = 1.0;
    return u;
  };
  return s;
}

InputSignal InputSignal::table(const VecX& times, const MatX& values) {
  if (times.size() < 2 || values.cols() != times.size())
    throw std::invalid_argument("InputSignal::table: need values per time sample");
  InputSignal s;
  s.dim_ = values.rows();
  s.name_ = "table";
  s.eval_ = [times, values](double t) {
    if (t <= times[0]) return VecX(values.col(0));
    if (t >= times[times.size() - 1]) return VecX(values.col(values.cols() - 1));
    Index k = 0;
    while (k + 1 < times.size() && times[k + 1] < t) ++k;
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    return VecX((1 - w) * values.col(k) + w * values.col(k + 1));
  };
  return s;
}

InputSignal InputSignal::parse(const std::string& spec, Index dim_hint) {
  if (spec == "u1") return u1();
  if (spec == "u2") return u2();
  if (spec == "fhn") return fhn_stimulus();
  if (spec == "zero") return zero(dim_hint);
  if (spec.rfind("constant:", 0) == 0) {
    const double v = std::stod(spec.substr(9));
    return constant(VecX::Constant(dim_hint, v));
  }
  if (spec.rfind("table:", 0) == 0) {
    std::ifstream in(spec.substr(6));
    if (!in) throw std::runtime_error("cannot open input table: " + spec.substr(6));
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> ts;
    std::vector<VecX> us;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok;
      std::vector<double> vals;
      while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
      ts.push_back(vals.at(0));
      VecX u(static_cast<Index>(vals.size()) - 1);
      for (Index j = 0; j < u.size(); ++j) u[j] = vals[static_cast<std::size_t>(j) + 1];
      us.push_back(u);
    }
    VecX times(static_cast<Index>(ts.size()));
    MatX values(us.front().size(), times.size());
    for (Index k = 0; k < times.size(); ++k) {
      times[k] = ts[static_cast<std::size_t>(k)];
      values.col(k) = us[static_cast<std::size_t>(k)];
    }
    return table(times, values);
  }
  throw std::invalid_argument("unknown input signal: " + spec);
}

namespace {

// Model policies for the shared TR-BDF2 core.

struct SparseOdeModel {
  const PolynomialSystem& sys;
  Eigen::SparseLU<SpMat> mass_lu;
  SpMat jac;
  Eigen::SparseLU<SpMat> iter_lu;
  bool iter_ok = false;

  explicit SparseOdeModel(const PolynomialSystem& s) : sys(s) {
    mass_lu.compute(sys.E);
    if (mass_lu.info() != Eigen::Success)
      throw std::runtime_error("integrate: mass matrix is not invertible");
  }
  Index dim() const { return sys.n; }
  Index input_dim() const { return sys.m; }
  VecX rhs(const VecX& x, const VecX& u) const { return sys.rhs(x, u); }
  VecX output(const VecX& x) const { return sys.C * x; }
  VecX mass_mul(const VecX& x) const { return sys.E * x; }
  VecX mass_solve(const VecX& v) { return mass_lu.solve(v); }
  void refresh_jacobian(const VecX& x, const VecX& u) { jac = sys.jacobian(x, u); }
  bool factor_iteration(double c) {
    SpMat M = sys.E - c * jac;
    M.makeCompressed();
    iter_lu.compute(M);
    iter_ok = (iter_lu.info() == Eigen::Success);
    return iter_ok;
  }
  VecX iteration_solve(const VecX& v) { return iter_lu.solve(v); }
};

struct DenseOdeModelAdapter {
  const DenseOdeModel& model;
  Eigen::PartialPivLU<MatX> mass_lu;
  MatX jac;
  Eigen::PartialPivLU<MatX> iter_lu;
  MatX output_map;  // optional C (empty: identity handled by caller)

  explicit DenseOdeModelAdapter(const DenseOdeModel& m) : model(m), output_map(m.output) {
    Eigen::FullPivLU<MatX> check(m.mass);
    if (!check.isInvertible())
      throw std::runtime_error("integrate: reduced mass matrix is singular");
    mass_lu.compute(m.mass);
  }
  Index dim() const { return model.n; }
  Index input_dim() const { return model.m; }
  VecX rhs(const VecX& x, const VecX& u) const { return model.rhs(x, u); }
  VecX output(const VecX& x) const { return output_map.rows() ? VecX(output_map * x) : x; }
  VecX mass_mul(const VecX& x) const { return model.mass * x; }
  VecX mass_solve(const VecX& v) { return mass_lu.solve(v); }
  void refresh_jacobian(const VecX& x, const VecX& u) { jac = model.jacobian(x, u); }
  bool factor_iteration(double c) {
    iter_lu.compute(MatX(model.mass - c * jac));
    return true;  // singular factors surface as non-finite Newton updates
  }
  VecX iteration_solve(const VecX& v) { return iter_lu.solve(v); }
};

constexpr double kGamma = 2.0 - M_SQRT2;
constexpr double kD = 1.0 - M_SQRT2 / 2.0;  // = gamma/2 = (1-gamma)/(2-gamma)

template <typename Model>
Trajectory integrate_core(Model& model, const InputSignal& u, double T,
                          const IntegrateOptions& opts) {
  if (u.dim() != model.input_dim())
    throw std::invalid_argument("integrate: input signal dimension does not match the system");
  if (T <= 0) throw std::invalid_argument("integrate: end time must be positive");

  const auto wall0 = std::chrono::steady_clock::now();
  const Index n = model.dim();
  const int samples = std::max(2, opts.samples);

  Trajectory traj;
  traj.times = VecX::LinSpaced(samples, 0.0, T);
  const Index qdim = model.output(VecX::Zero(n)).size();
  traj.outputs.resize(qdim, samples);
  traj.outputs.setConstant(std::numeric_limits<double>::quiet_NaN());

  VecX x = VecX::Zero(n);
  double t = 0.0;
  traj.outputs.col(0) = model.output(x);
  int next_sample = 1;

  auto scaled_norm = [&](const VecX& v, const VecX& ref_a, const VecX& ref_b) {
    double acc = 0;
    for (Index i = 0; i < v.size(); ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(ref_a[i]), std::abs(ref_b[i]));
      const double e = v[i] / sc;
      acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };

  // Error weights of the embedded third-order comparison.
  const double e1 = (M_SQRT2 - 1.0) / 3.0;
  const double e2 = -1.0 / 3.0;
  const double e3 = (2.0 - M_SQRT2) / 3.0;

  const double c1 = 1.0 / (kGamma * (2.0 - kGamma));
  const double c2 = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));

  VecX Fn = model.rhs(x, u(0.0));
  double h = std::min(T * 1e-4, T);
  const double hmin_floor = T * 1e-14;

  auto declare_divergence = [&](double when) {
    traj.diverged = true;
    traj.divergence_time = when;
  };

  auto newton_solve = [&](VecX& xi, double coeff, const VecX& affine, double tstage) -> bool {
    // Solves mass·xi - coeff·F(xi, u(tstage)) - affine = 0 by simplified Newton.
    for (int it = 0; it < opts.max_newton; ++it) {
      const VecX R = model.mass_mul(xi) - coeff * model.rhs(xi, u(tstage)) - affine;
      const VecX delta = model.iteration_solve(-R);
      if (!delta.allFinite()) return false;
      xi += delta;
      if (scaled_norm(delta, xi, xi) < opts.newton_tol) return true;
      // Increments at the rounding floor cannot shrink further.
      if (delta.norm() <= 32.0 * std::numeric_limits<double>::epsilon() * (1.0 + xi.norm()))
        return true;
    }
    return false;
  };

  while (t < T * (1.0 - 1e-14)) {
    h = std::min(h, T - t);
    if (h < hmin_floor || !std::isfinite(h)) {
      declare_divergence(t);
      break;
    }

    model.refresh_jacobian(x, u(t));
    if (!model.factor_iteration(kD * h)) {
      ++traj.rejected;
      h *= 0.3;
      continue;
    }

    const double tg = t + kGamma * h;
    const double t1 = t + h;
    const VecX xdot_n = model.mass_solve(Fn);

    // TR stage: mass·xg - (γh/2)·F(xg) = mass·x + (γh/2)·Fn.
    VecX xg = x + (kGamma * h) * xdot_n;  // explicit Euler predictor
    const VecX affine_tr = model.mass_mul(x) + (kGamma * h / 2.0) * Fn;
    if (!newton_solve(xg, kGamma * h / 2.0, affine_tr, tg)) {
      ++traj.rejected;
      h *= 0.3;
      continue;
    }
    const VecX Fg = model.rhs(xg, u(tg));

    // BDF2 stage: mass·x1 - d·h·F(x1) = mass·(c1·xg - c2·x).
    VecX x1 = x + (xg - x) / kGamma;  // linear extrapolation predictor
    const VecX affine_bdf = model.mass_mul(c1 * xg - c2 * x);
    if (!newton_solve(x1, kD * h, affine_bdf, t1)) {
      ++traj.rejected;
      h *= 0.3;
      continue;
    }
    const VecX F1 = model.rhs(x1, u(t1));

    const VecX est = model.iteration_solve(h * (e1 * Fn + e2 * Fg + e3 * F1));
    if (!est.allFinite() || !x1.allFinite()) {
      ++traj.rejected;
      h *= 0.3;
      continue;
    }
    // Per-step control with a safety margin so the accumulated error stays
    // near the requested tolerances over the whole interval.
    constexpr double kErrSafety = 0.02;
    const double err = scaled_norm(est, x, x1) / kErrSafety;

    if (err <= 1.0) {
      // Accept; sample the unit-interval Hermite interpolant on [t, t1].
      const VecX xdot_1 = model.mass_solve(F1);
      while (next_sample < samples && traj.times[next_sample] <= t1 + 1e-14 * T) {
        const double th = (traj.times[next_sample] - t) / h;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
        const double h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th);
        const double h11 = th * th * (th - 1);
        const VecX xs = h00 * x + (h10 * h) * xdot_n + h01 * x1 + (h11 * h) * xdot_1;
        traj.outputs.col(next_sample) = model.output(xs);
        ++next_sample;
      }
      t = t1;
      x = x1;
      Fn = F1;
      ++traj.steps;
      if (x.cwiseAbs().maxCoeff() > opts.divergence_norm) {
        declare_divergence(t);
        break;
      }
      const double grow = 0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0);
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      ++traj.rejected;
      const double shrink = 0.9 * std::pow(err, -1.0 / 3.0);
      h *= std::clamp(shrink, 0.1, 0.5);
    }
  }

  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return traj;
}

}  // namespace

Trajectory integrate(const PolynomialSystem& sys, const InputSignal& u, double T,
                     const IntegrateOptions& opts) {
  SparseOdeModel model(sys);
  return integrate_core(model, u, T, opts);
}

Trajectory integrate(const ReducedSystem& rom, const InputSignal& u, double T,
                     const IntegrateOptions& opts) {
  if (rom.e_singular)
    throw std::runtime_error("integrate: reduced E was flagged singular at assembly");
  DenseOdeModel model;
  model.n = rom.r;
  model.m = rom.m;
  model.mass = rom.E;
  model.rhs = [&rom](const VecX& x, const VecX& u_) { return rom.rhs(x, u_); };
  model.jacobian = [&rom](const VecX& x, const VecX& u_) { return rom.jacobian(x, u_); };
  model.output = rom.C;
  DenseOdeModelAdapter adapter(model);
  return integrate_core(adapter, u, T, opts);
}

Trajectory integrate(const DenseOdeModel& model, const InputSignal& u, double T,
                     const IntegrateOptions& opts) {
  DenseOdeModelAdapter adapter(model);
  return integrate_core(adapter, u, T, opts);
}

ErrorReport compare(const Trajectory& ref, const Trajectory& rom) {
  if (ref.times.size() != rom.times.size() ||
      (ref.times - rom.times).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, ref.times.maxCoeff()))
    throw std::invalid_argument("compare: trajectories live on different time grids");
  if (ref.outputs.rows() != rom.outputs.rows())
    throw std::invalid_argument("compare: output dimensions differ");

  ErrorReport rep;
  rep.times = ref.times;
  rep.ref_diverged = ref.diverged;
  rep.rom_diverged = rom.diverged;
  const Index q = ref.outputs.rows();
  const Index s = ref.times.size();
  rep.pointwise_rel.resize(q, s);
  rep.rel_linf_per_output.resize(q);
  rep.rel_l2_per_output.resize(q);

  if (ref.diverged || rom.diverged) {
    rep.pointwise_rel.setConstant(std::numeric_limits<double>::infinity());
    rep.rel_linf_per_output.setConstant(std::numeric_limits<double>::infinity());
    rep.rel_l2_per_output.setConstant(std::numeric_limits<double>::infinity());
    rep.rel_linf = rep.rel_l2 = std::numeric_limits<double>::infinity();
    return rep;
  }

  for (Index j = 0; j < q; ++j) {
    const double scale = ref.outputs.row(j).cwiseAbs().maxCoeff();
    const double denom = scale > 0 ? scale : 1.0;
    rep.pointwise_rel.row(j) = (ref.outputs.row(j) - rom.outputs.row(j)).cwiseAbs() / denom;
    rep.rel_linf_per_output[j] = rep.pointwise_rel.row(j).maxCoeff();
    const double ref_l2 = ref.outputs.row(j).norm();
    rep.rel_l2_per_output[j] =
        (ref.outputs.row(j) - rom.outputs.row(j)).norm() / (ref_l2 > 0 ? ref_l2 : 1.0);
  }
  rep.rel_linf = rep.rel_linf_per_output.maxCoeff();
  rep.rel_l2 = rep.rel_l2_per_output.maxCoeff();
  return rep;
}

bool limit_cycle_proxy(const Trajectory& traj, Index output, double t_min, int min_crossings) {
  if (traj.diverged) return false;
  std::vector<double> vals, times;
  for (Index k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] >= t_min) {
      vals.push_back(traj.outputs(output, k));
      times.push_back(traj.times[k]);
    }
  }
  if (vals.size() < 3) return false;
  const double lo = *std::min_element(vals.begin(), vals.end());
  const double hi = *std::max_element(vals.begin(), vals.end());
  if (!(hi > lo)) return false;
  const double level = 0.5 * (lo + hi);
  int crossings = 0;
  for (std::size_t k = 1; k < vals.size(); ++k)
    if (vals[k - 1] < level && vals[k] >= level) ++crossings;
  return crossings >= min_crossings;
}

}  // namespace polymor
