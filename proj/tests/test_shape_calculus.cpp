#include <doctest.h>

#include <cmath>

#include "peristokes/shape_calculus.hpp"

#include "test_support.hpp"

using namespace peristokes;
using namespace peristokes::testing;

namespace {

struct FD {
  double dJ, dQ, dV;
};

FD central_fd(const WallShapeParams& p, int k, const SolverConfig& cfg, double h) {
  auto eval = [&](double delta) {
    WallShapeParams q = p;
    q.xi(k) += delta;
    Pipeline pl(q, cfg);
    return evaluate_functionals(pl.fwd, pl.adj, pl.geom, cfg, {});
  };
  const FunctionalValues fp = eval(h), fm = eval(-h);
  return {(fp.J_PL - fm.J_PL) / (2 * h), (fp.Q - fm.Q) / (2 * h), (fp.V - fm.V) / (2 * h)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-10}); }

}  // namespace

TEST_CASE("grad_CV: trivial cases and flat-channel analytic entries") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  ChannelGeometry g = make_channel_geometry(p, cfg.M, cfg.Mp);

  // zero perturbation
  PerturbationField z = perturbation_from_nodal(g, Eigen::MatrixX2d::Zero(cfg.M, 2),
                                                Eigen::MatrixX2d::Zero(cfg.M, 2), 0.0, 0.0);
  CHECK(grad_CV(g, z) == doctest::Approx(0.0));

  // theta_n = 1 on the top wall only: integral is the wall length = 2 pi
  Eigen::MatrixX2d up = Eigen::MatrixX2d::Zero(cfg.M, 2);
  up.col(1).setOnes();
  PerturbationField lift = perturbation_from_nodal(g, up, Eigen::MatrixX2d::Zero(cfg.M, 2), 1.0, 0.0);
  CHECK(grad_CV(g, lift) == doctest::Approx(2.0 * M_PI).epsilon(1e-13));

  // analytic volume derivatives of the basis: L for xi2+_0, -L for upper
  // cos modes, 0 for sin and x1 modes, +L for lower cos modes
  const int N = p.N;
  CHECK(grad_CV(g, basis_perturbation(p, 4 * N, g)) == doctest::Approx(p.L).epsilon(1e-12));
  CHECK(grad_CV(g, basis_perturbation(p, 4 * N + 1, g)) == doctest::Approx(-p.L).epsilon(1e-12));
  CHECK(grad_CV(g, basis_perturbation(p, 4 * N + N + 1, g)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(grad_CV(g, basis_perturbation(p, 0, g)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(grad_CV(g, basis_perturbation(p, 6 * N + 1, g)) == doctest::Approx(p.L).epsilon(1e-12));
}

TEST_CASE("flat channel is a stationary point of J_PL") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  GradientResult r = full_gradient(p, cfg, {});
  CHECK(r.grad.dJ.lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(r.solve_count == 2);
}

TEST_CASE("flat channel: uniform top-wall lift leaves Q unchanged") {
  // wall integral (c/L) delta l+ cancels the endpoint term delta * u1(z+)
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = flat_channel();
  GradientResult r = full_gradient(p, cfg, {});
  CHECK(std::abs(r.grad.dCQ(p.index_xi2_upper0())) < 1e-8);
}

TEST_CASE("analytic gradients match central finite differences (spot check)") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  Pipeline pl(p, cfg);
  const double h = 1e-5;
  for (int k : {0, 5, 8, 9, 14}) {
    const PerturbationField theta = basis_perturbation(p, k, pl.geom);
    const double dJ = grad_JPL(pl.fwd, pl.geom, cfg, theta);
    const double dQ = grad_CQ(pl.fwd, pl.adj, pl.geom, cfg, theta);
    const double dV = grad_CV(pl.geom, theta);
    const FD fd = central_fd(p, k, cfg, h);
    CHECK(rel(dJ, fd.dJ) < 1e-6);
    CHECK(rel(dQ, fd.dQ) < 1e-6);
    CHECK(std::abs(dV - fd.dV) < 1e-8);
  }
}

TEST_CASE("FD step plateau: consistent derivatives across h") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  Pipeline pl(p, cfg);
  const int k = 9;
  const PerturbationField theta = basis_perturbation(p, k, pl.geom);
  const double dJ = grad_JPL(pl.fwd, pl.geom, cfg, theta);
  for (double h : {1e-4, 1e-5, 1e-6}) {
    const FD fd = central_fd(p, k, cfg, h);
    CHECK(rel(dJ, fd.dJ) < 1e-5);
  }
}

TEST_CASE("structure theorem: tangential perturbations are null directions") {
  SolverConfig cfg = test_solver_config(64);
  WallShapeParams p = wavy_channel();
  Pipeline pl(p, cfg);
  // admissible tangential field theta = sin(t) tau on the upper wall
  Eigen::MatrixX2d thu(cfg.M, 2), thl = Eigen::MatrixX2d::Zero(cfg.M, 2);
  for (int j = 0; j < cfg.M; ++j)
    thu.row(j) = std::sin(pl.geom.upper.t(j)) * pl.geom.upper.tau.row(j);
  PerturbationField theta = perturbation_from_nodal(pl.geom, thu, thl, 0.0, 0.0);
  CHECK(theta.theta_n_upper.lpNorm<Eigen::Infinity>() < 1e-13);
  CHECK(std::abs(grad_JPL(pl.fwd, pl.geom, cfg, theta)) < 1e-9);
  CHECK(std::abs(grad_CV(pl.geom, theta)) < 1e-12);
  CHECK(std::abs(grad_CQ(pl.fwd, pl.adj, pl.geom, cfg, theta)) < 1e-9);
}

TEST_CASE("pressure-gauge invariance of grad_JPL") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  Pipeline pl(p, cfg);
  const PerturbationField theta = basis_perturbation(p, 9, pl.geom);
  const double g0 = grad_JPL(pl.fwd, pl.geom, cfg, theta);
  FlowSolution shifted = pl.fwd;
  shifted.pressure_upper.array() += 11.0;
  shifted.pressure_lower.array() += 11.0;
  const double g1 = grad_JPL(shifted, pl.geom, cfg, theta);
  CHECK(std::abs(g1 - g0) < 1e-10);
}

TEST_CASE("gradients are linear in the perturbation") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  Pipeline pl(p, cfg);
  const PerturbationField t1 = basis_perturbation(p, 2, pl.geom);
  const PerturbationField t2 = basis_perturbation(p, 11, pl.geom);
  const double a = 1.3, b = -0.7;
  PerturbationField mix = perturbation_from_nodal(
      pl.geom, a * t1.theta_upper + b * t2.theta_upper, a * t1.theta_lower + b * t2.theta_lower,
      a * t1.theta2_at_zplus + b * t2.theta2_at_zplus,
      a * t1.theta2_at_zminus + b * t2.theta2_at_zminus);
  for (auto grad : {+[](const Pipeline& q, const SolverConfig& c, const PerturbationField& th) {
                      return grad_JPL(q.fwd, q.geom, c, th);
                    },
                    +[](const Pipeline& q, const SolverConfig& c, const PerturbationField& th) {
                      return grad_CQ(q.fwd, q.adj, q.geom, c, th);
                    }}) {
    const double lhs = grad(pl, cfg, mix);
    const double rhs = a * grad(pl, cfg, t1) + b * grad(pl, cfg, t2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("full_gradient assembles all three gradients over the basis") {
  SolverConfig cfg = test_solver_config(48);
  WallShapeParams p = wavy_channel();
  GradientResult r = full_gradient(p, cfg, {0.1, 9.0});
  CHECK(r.grad.dJ.size() == p.num_params());
  CHECK(r.values.C_Q == doctest::Approx(r.values.Q - 0.1));
  CHECK(r.values.C_V == doctest::Approx(r.values.V - 9.0));
  Pipeline pl(p, cfg);
  const PerturbationField theta = basis_perturbation(p, 3, pl.geom);
  CHECK(r.grad.dJ(3) == doctest::Approx(grad_JPL(pl.fwd, pl.geom, cfg, theta)).epsilon(1e-12));
}
