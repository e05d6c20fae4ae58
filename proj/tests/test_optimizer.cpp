#include <doctest.h>

#include <cmath>

#include "peristokes/optimizer.hpp"
#include "test_support.hpp"

using namespace peristokes;
using namespace peristokes::testing;

TEST_CASE("augmented Lagrangian value arithmetic") {
  OptState st;
  FunctionalValues fv;
  fv.J_PL = 2.0;
  SUBCASE("feasible point gives back J") {
    fv.C_Q = 0.0;
    fv.C_V = 0.0;
    CHECK(augmented_lagrangian_value(fv, st) == doctest::Approx(2.0));
  }
  SUBCASE("penalty-only term") {
    st.lambda.setZero();
    st.sigma << 10.0, 10.0;
    fv.C_Q = 0.1;
    fv.C_V = 0.0;
    CHECK(augmented_lagrangian_value(fv, st) == doctest::Approx(2.05).epsilon(1e-15));
  }
  SUBCASE("multiplier term") {
    st.lambda << 2.0, -1.0;
    st.sigma << 4.0, 6.0;
    fv.C_Q = 0.5;
    fv.C_V = 0.25;
    const double expect = 2.0 - 2.0 * 0.5 - (-1.0) * 0.25 + 2.0 * 0.25 + 3.0 * 0.0625;
    CHECK(augmented_lagrangian_value(fv, st) == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("gradient of L_A matches finite differences of the scalar") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  Targets tgt{0.2, 9.5};
  OptState st;
  st.lambda << 0.4, -0.3;
  st.sigma << 10.0, 10.0;

  auto L_of = [&](const WallShapeParams& q) {
    Pipeline pl(q, cfg);
    FunctionalValues fv = evaluate_functionals(pl.fwd, pl.adj, pl.geom, cfg, tgt);
    return augmented_lagrangian_value(fv, st);
  };
  GradientResult gr = full_gradient(p, cfg, tgt);
  for (int k : {4, 9, 15}) {
    const double an = gr.grad.dJ(k) - st.lambda(0) * gr.grad.dCQ(k) - st.lambda(1) * gr.grad.dCV(k) +
                      st.sigma(0) * gr.values.C_Q * gr.grad.dCQ(k) +
                      st.sigma(1) * gr.values.C_V * gr.grad.dCV(k);
    const double h = 1e-5;
    WallShapeParams qp = p, qm = p;
    qp.xi(k) += h;
    qm.xi(k) -= h;
    const double fd = (L_of(qp) - L_of(qm)) / (2 * h);
    CHECK(std::abs(an - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
  }
}

TEST_CASE("BFGS on a known convex quadratic reaches the analytic minimizer") {
  // same update rules as the production inner loop, driven on a quadratic
  const int n = 6;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = 1.0 + i;
  A(0, 3) = A(3, 0) = 0.4;
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  const Eigen::VectorXd xstar = A.ldlt().solve(b);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  auto grad = [&](const Eigen::VectorXd& v) { return (A * v - b).eval(); };
  auto val = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(A * v) - b.dot(v); };
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < 2 * n; ++j) {
    const Eigen::VectorXd g = grad(x);
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    const Eigen::VectorXd pdir = B.llt().solve(-g);
    double eta = 1.0;
    while (val(x + eta * pdir) > val(x) + 1e-4 * eta * g.dot(pdir)) eta *= 0.5;
    const Eigen::VectorXd s = eta * pdir, y = grad(x + s) - g;
    if (s.dot(y) > 1e-12)
      B += (y * y.transpose()) / s.dot(y) - (B * s) * (B * s).transpose() / s.dot(B * s);
    x += s;
  }
  CHECK((x - xstar).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("feasible flat start terminates immediately") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  Targets tgt{0.0, 4.0 * M_PI};  // flat channel already optimal and feasible
  OptOptions opt;
  OptResult res = solve_constrained(p, tgt, cfg, opt);
  CHECK(res.state.converged);
  CHECK(res.state.m == 1);
  CHECK((res.shape.xi - p.xi).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(std::abs(res.values.C_Q) < 1e-3);
  CHECK(std::abs(res.values.C_V) < 1e-3);
}

TEST_CASE("constrained solve reaches feasibility on a nontrivial target") {
  SolverConfig cfg = test_solver_config(48);
  // start from a bump, not the flat channel: pumping is quadratic in the
  // wall amplitude, so the exactly-flat shape is a stationary point of Q
  // and the optimizer would (correctly) not move from it
  WallShapeParams p = flat_channel();
  p.xi(p.index_xi2_upper0() + 1) = 0.3;
  Targets tgt{0.15, 4.0 * M_PI};
  OptOptions opt;
  OptResult res = solve_constrained(p, tgt, cfg, opt);
  CHECK(res.state.converged);
  CHECK(std::abs(res.values.C_Q) < 1e-3);
  CHECK(std::abs(res.values.C_V) < 1e-3);
  CHECK(res.values.J_PL > 0.0);
  // AL bookkeeping invariants
  CHECK(res.state.sigma.minCoeff() >= 10.0);
  CHECK(res.state.solve_count > 0);

  // inner monotonicity of L_A within each outer iteration is implied by the
  // Armijo acceptance; spot check the recorded history is well-formed
  int last_m = 0;
  for (const InnerRecord& r : res.state.history) {
    CHECK(r.m >= last_m);
    last_m = r.m;
    CHECK(r.step > 0.0);
  }
}

TEST_CASE("convergence log is reproducible byte for byte") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  p.xi(p.index_xi2_upper0() + 1) = 0.1;
  Targets tgt{0.05, 4.0 * M_PI};
  OptOptions opt;
  opt.max_outer = 3;
  OptResult a = solve_constrained(p, tgt, cfg, opt);
  OptResult b = solve_constrained(p, tgt, cfg, opt);
  CHECK(format_convergence_log(a.state) == format_convergence_log(b.state));
  CHECK(!format_convergence_log(a.state).empty());
}

TEST_CASE("free-index masking keeps the lower wall fixed") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  Targets tgt{0.1, 4.0 * M_PI};
  OptOptions opt;
  const int N = p.N;
  for (int k = 0; k < 2 * N; ++k) opt.free_indices.push_back(k);
  for (int k = 4 * N; k < 6 * N + 1; ++k) opt.free_indices.push_back(k);
  opt.max_outer = 4;
  OptResult res = solve_constrained(p, tgt, cfg, opt);
  for (int k = 2 * N; k < 4 * N; ++k) CHECK(res.shape.xi(k) == 0.0);
  for (int k = 6 * N + 1; k < 8 * N + 1; ++k) CHECK(res.shape.xi(k) == 0.0);
}
