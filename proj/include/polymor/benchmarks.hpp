#pragma once

#include <string>

#include "polymor/ode.hpp"
#include "polymor/system.hpp"

namespace polymor {

// Chafee-Infante reaction-diffusion on (0, L): v' = v_xx + v(1 - v^2) with a
// Dirichlet control at x = 0 and a Neumann wall at x = L. Central second
// differences on the k interior/right nodes, output v(L).
PolynomialSystem make_chafee(Index k, double L = 1.0);

// Parametric variant v' = v_xx + v(p - v^2), p in [0.25, 2].
AffineParametricSystem make_chafee_parametric(Index k, double L = 1.0);

struct FhnOptions {
  Index k = 100;  // v grid points; state dimension is 2k
  double epsilon = 0.015;
  double coupling = 0.5;  // v coefficient in the w equation
  double gamma = 2.0;
  double source = 0.05;  // q, wired as the constant second input channel
  double length = 0.1;
  double stimulus_amplitude = 5e4;
  double stimulus_decay = 15.0;  // i0(t) = amplitude · t^3 · exp(-decay · t)
};

// FitzHugh-Nagumo coupled cubic system, states [v; w], two inputs (i0 and the
// constant source channel), outputs v and w at the left boundary node.
PolynomialSystem make_fhn(const FhnOptions& opts = {});

struct BenchmarkSpec {
  std::string name;  // chafee | chafee-param | fhn
  Index grid = 0;
  double length = 0.0;
  FhnOptions fhn;

  static BenchmarkSpec by_name(const std::string& name, Index grid);
  double default_end_time() const;      // chafee: 5, fhn: 10
  InputSignal default_input() const;    // u1 for chafee, the stimulus for fhn
  bool parametric() const { return name == "chafee-param"; }
  PolynomialSystem build() const;
  AffineParametricSystem build_parametric() const;
};

}  // namespace polymor
