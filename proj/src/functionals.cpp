#include "peristokes/functionals.hpp"

namespace peristokes {

double power_loss(const FlowSolution& fwd, const ChannelGeometry& geom, const SolverConfig& cfg) {
  double J = 0.0;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const Eigen::MatrixX2d& f = side == WallSide::Upper ? fwd.traction_upper : fwd.traction_lower;
    const double speed = cfg.c * w.ell / geom.L;
    for (int j = 0; j < w.M; ++j) {
      const Vec2 uD = speed * w.tangent(j);
      J += f.row(j).dot((uD + Vec2(cfg.c, 0.0)).transpose()) * w.w(j);
    }
  }
  return J;
}

double flow_rate(const FlowSolution& adj, const ChannelGeometry& geom, const SolverConfig& cfg) {
  if (adj.kind != ProblemKind::Adjoint)
    throw SolverError("flow_rate: needs the adjoint solution for the reciprocity flux");
  double flux = 0.0;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const Eigen::MatrixX2d& f = side == WallSide::Upper ? adj.traction_upper : adj.traction_lower;
    const double speed = cfg.c * w.ell / geom.L;
    for (int j = 0; j < w.M; ++j)
      flux += f.row(j).dot(speed * w.tau.row(j)) * w.w(j);
  }
  return flux + cfg.c / geom.L * geom.volume;
}

void constraint_values(FunctionalValues& fv, const Targets& targets) {
  fv.C_Q = fv.Q - targets.Q0;
  fv.C_V = fv.V - targets.V0;
}

FunctionalValues evaluate_functionals(const FlowSolution& fwd, const FlowSolution& adj,
                                      const ChannelGeometry& geom, const SolverConfig& cfg,
                                      const Targets& targets) {
  FunctionalValues fv;
  fv.J_PL = power_loss(fwd, geom, cfg);
  fv.Q = flow_rate(adj, geom, cfg);
  fv.V = geom.volume;
  constraint_values(fv, targets);
  return fv;
}

}  // namespace peristokes
