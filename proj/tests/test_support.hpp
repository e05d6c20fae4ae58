// Shared fixtures and independent oracles for the test suites.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "peristokes/periodic_bie.hpp"

namespace peristokes::testing {

/// Adaptive Simpson quadrature; independent of the library's periodic
/// trapezoidal machinery.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 24) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double a_, double b_, double fa, double fm, double fb, double whole, double tol_,
          int d) -> double {
    const double m = 0.5 * (a_ + b_);
    const double lm = 0.5 * (a_ + m), rm = 0.5 * (m + b_);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a_) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b_ - m) / 6.0 * (fm + 4 * frm + fb);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol_)
      return left + right + (left + right - whole) / 15.0;
    return rec(a_, m, fa, flm, fm, left, 0.5 * tol_, d - 1) +
           rec(m, b_, fm, frm, fb, right, 0.5 * tol_, d - 1);
  };
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, tol, depth);
}

/// Flat channel: upper wall at +1, lower anchored at -1, L = 2 pi.
inline WallShapeParams flat_channel(int N = 2) {
  WallShapeParams p(N);
  p.xi(p.index_xi2_upper0()) = 1.0;
  return p;
}

/// Mildly wavy asymmetric channel used across the solver tests
/// (x1 and x2 modes on both walls, comfortable wall gap).
inline WallShapeParams wavy_channel() {
  WallShapeParams p(2);
  const int N = 2;
  p.xi(4 * N) = 1.0;           // upper offset
  p.xi(4 * N + 1) = 0.25;      // upper cos t
  p.xi(4 * N + N + 2) = 0.12;  // upper sin 2t
  p.xi(N) = 0.15;              // upper x1 sin t
  p.xi(6 * N + 1) = -0.2;      // lower cos t
  p.xi(2 * N + N) = -0.1;      // lower x1 sin t
  return p;
}

/// A second distinct non-flat shape for gradient audits.
inline WallShapeParams bumpy_channel() {
  WallShapeParams p(2);
  const int N = 2;
  p.xi(4 * N) = 1.1;
  p.xi(4 * N + 2) = -0.18;     // upper cos 2t
  p.xi(4 * N + N + 1) = 0.2;   // upper sin t
  p.xi(6 * N + 2) = 0.1;       // lower cos 2t
  p.xi(2 * N + 1) = 0.08;      // lower x1 cos 2t
  return p;
}

inline SolverConfig test_solver_config(int M = 64) {
  SolverConfig cfg;
  cfg.M = M;
  return cfg;
}

struct Pipeline {
  ChannelGeometry geom;
  PeriodicStokesSolver solver;
  FlowSolution fwd, adj;

  Pipeline(const WallShapeParams& p, const SolverConfig& cfg)
      : geom(make_channel_geometry(p, cfg.M, cfg.Mp)),
        solver(geom, cfg),
        fwd(solver.solve_forward()),
        adj(solver.solve_adjoint()) {}
};

}  // namespace peristokes::testing
