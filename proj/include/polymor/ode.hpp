#pragma once

#include <functional>
#include <string>

#include "polymor/loewner.hpp"
#include "polymor/system.hpp"
#include "polymor/types.hpp"

namespace polymor {

// Time-dependent input signal. Built-ins follow the benchmark protocol;
// tables are piecewise linear in t.
class InputSignal {
 public:
  static InputSignal zero(Index dim = 1);
  static InputSignal constant(const VecX& value);
  static InputSignal u1();  // 10 (sin(pi t) + 1)
  static InputSignal u2();  // 5 t e^{-t}
  // Two channels: [amplitude t^3 e^{-decay t}, 1].
  static InputSignal fhn_stimulus(double amplitude = 5e4, double decay = 15.0);
  static InputSignal table(const VecX& times, const MatX& values);  // values: dim x |times|

  // "u1" | "u2" | "zero" | "fhn" | "constant:<v>" | "table:<csv path>".
  static InputSignal parse(const std::string& spec, Index dim_hint);

  Index dim() const { return dim_; }
  VecX operator()(double t) const { return eval_(t); }
  const std::string& name() const { return name_; }

 private:
  Index dim_ = 1;
  std::string name_;
  std::function<VecX(double)> eval_;
};

struct Trajectory {
  VecX times;    // equidistant samples in [0, T]
  MatX outputs;  // q x samples; NaN past the divergence time
  bool diverged = false;
  double divergence_time = 0.0;
  long steps = 0;
  long rejected = 0;
  double wall_seconds = 0.0;
};

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-8;
  int samples = 500;
  double divergence_norm = 1e12;
  int max_newton = 12;
  double newton_tol = 1e-3;  // scaled Newton increment threshold
};

Trajectory integrate(const PolynomialSystem& sys, const InputSignal& u, double T,
                     const IntegrateOptions& opts = {});
Trajectory integrate(const ReducedSystem& rom, const InputSignal& u, double T,
                     const IntegrateOptions& opts = {});

// Dense-model escape hatch for alternative evaluators (hyper-reduced terms,
// reduced Hadamard path): supply rhs/jacobian callbacks and the dense mass.
struct DenseOdeModel {
  Index n = 0, m = 0;
  MatX mass;
  MatX output;  // q x n map; empty selects the full state
  std::function<VecX(const VecX&, const VecX&)> rhs;
  std::function<MatX(const VecX&, const VecX&)> jacobian;
};
Trajectory integrate(const DenseOdeModel& model, const InputSignal& u, double T,
                     const IntegrateOptions& opts = {});

struct ErrorReport {
  VecX times;
  MatX pointwise_rel;  // q x samples, |y - yr| / max_t |y_j|
  VecX rel_linf_per_output, rel_l2_per_output;
  double rel_linf = 0.0, rel_l2 = 0.0;  // worst output
  bool ref_diverged = false, rom_diverged = false;
};

// Pointwise relative error report; grids must match.
ErrorReport compare(const Trajectory& ref, const Trajectory& rom);

// Limit-cycle proxy: the first output crosses its mid-range level upward at
// least `min_crossings` times after t_min.
bool limit_cycle_proxy(const Trajectory& traj, Index output = 0, double t_min = 2.0,
                       int min_crossings = 2);

}  // namespace polymor
