#include "peristokes/shape_calculus.hpp"

#include <cmath>

#include "peristokes/spectral.hpp"

namespace peristokes {

namespace {

// int_wall (d_s theta_n) p ds for a wall pressure with a linear-in-x1 part:
// p(t) = p_periodic(t) + (jump / 2pi) t. Integration by parts in t gives
//   -int theta_n'(t) p_per dt - jump * theta_n(0) + (jump/2pi) int theta_n dt.
double int_dstn_pressure(const DiscretizedWall& w, const Eigen::VectorXd& theta_n,
                         const Eigen::VectorXd& p, double jump) {
  const int M = w.M;
  const double dt = 2.0 * M_PI / M;
  static thread_local int cachedM = -1;
  static thread_local Eigen::MatrixXd D;
  if (cachedM != M) {
    D = trig_diff_matrix(M);
    cachedM = M;
  }
  const Eigen::VectorXd dtn = D * theta_n;
  double acc = 0.0, itn = 0.0;
  for (int j = 0; j < M; ++j) {
    const double p_per = p(j) - (jump / (2.0 * M_PI)) * w.t(j);
    acc -= dtn(j) * p_per * dt;
    itn += theta_n(j) * dt;
  }
  return acc - jump * theta_n(0) + (jump / (2.0 * M_PI)) * itn;
}

}  // namespace

double grad_CV(const ChannelGeometry& geom, const PerturbationField& theta) {
  return theta.theta_n_upper.dot(geom.upper.w) + theta.theta_n_lower.dot(geom.lower.w);
}

double grad_JPL(const FlowSolution& fwd, const ChannelGeometry& geom, const SolverConfig& cfg,
                const PerturbationField& theta) {
  const double c = cfg.c, L = geom.L, mu = cfg.mu;
  double out = 0.0;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const Eigen::VectorXd& fs = fwd.fs(side);
    const Eigen::VectorXd& p = fwd.pressure(side);
    const Eigen::VectorXd& tn = theta.theta_n(side);
    const double dls = dl_star(w, tn);
    double wall_int = 0.0, int_fs = 0.0;
    for (int j = 0; j < w.M; ++j) {
      wall_int += (2.0 * c * w.ell * w.kappa(j) / L * fs(j) - fs(j) * fs(j) / mu) * tn(j) * w.w(j);
      int_fs += fs(j) * w.w(j);
    }
    out += wall_int + (2.0 * c / L) * (dls * int_fs - w.ell * int_dstn_pressure(w, tn, p, 0.0));
  }
  return out;
}

double grad_CQ(const FlowSolution& fwd, const FlowSolution& adj, const ChannelGeometry& geom,
               const SolverConfig& cfg, const PerturbationField& theta) {
  const double c = cfg.c, L = geom.L, mu = cfg.mu;
  double out = 0.0;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const Eigen::VectorXd& fs = fwd.fs(side);
    const Eigen::VectorXd& fsh = adj.fs(side);
    const Eigen::VectorXd& ph = adj.pressure(side);
    const Eigen::VectorXd& tn = theta.theta_n(side);
    const double dls = dl_star(w, tn);
    double wall_int = 0.0, int_fsh = 0.0;
    for (int j = 0; j < w.M; ++j) {
      wall_int += (c * w.ell * w.kappa(j) / L * fsh(j) - fs(j) * fsh(j) / mu + c / L) * tn(j) * w.w(j);
      int_fsh += fsh(j) * w.w(j);
    }
    out += wall_int +
           (c / L) * (dls * int_fsh - w.ell * int_dstn_pressure(w, tn, ph, adj.pressure_jump));
  }
  // endpoint bracket with the slip value of u1 at z+/-
  const double u1_zp = (c * geom.upper.ell / L) * geom.upper.tau(0, 0);
  const double u1_zm = (c * geom.lower.ell / L) * geom.lower.tau(0, 0);
  out += theta.theta2_at_zplus * u1_zp - theta.theta2_at_zminus * u1_zm;
  return out;
}

GradientResult full_gradient(const WallShapeParams& params, const SolverConfig& cfg,
                             const Targets& targets) {
  const ChannelGeometry geom = make_channel_geometry(params, cfg.M, cfg.Mp);
  const PeriodicStokesSolver solver(geom, cfg);
  const FlowSolution fwd = solver.solve_forward();
  const FlowSolution adj = solver.solve_adjoint();

  GradientResult r;
  r.values = evaluate_functionals(fwd, adj, geom, cfg, targets);
  const int n = params.num_params();
  r.grad.dJ.resize(n);
  r.grad.dCQ.resize(n);
  r.grad.dCV.resize(n);
  for (int k = 0; k < n; ++k) {
    const PerturbationField theta = basis_perturbation(params, k, geom);
    r.grad.dJ(k) = grad_JPL(fwd, geom, cfg, theta);
    r.grad.dCQ(k) = grad_CQ(fwd, adj, geom, cfg, theta);
    r.grad.dCV(k) = grad_CV(geom, theta);
  }
  r.solve_count = 2;
  return r;
}

}  // namespace peristokes
