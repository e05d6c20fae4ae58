#pragma once

#include "peristokes/functionals.hpp"

namespace peristokes {

/// Design-space gradients of the three functionals.
struct GradientVector {
  Eigen::VectorXd dJ;   ///< power-loss gradient, length 8N+1
  Eigen::VectorXd dCQ;  ///< flow-rate gradient
  Eigen::VectorXd dCV;  ///< volume gradient
};

/// Volume derivative: int_Gamma theta_n ds over both walls.
double grad_CV(const ChannelGeometry& geom, const PerturbationField& theta);

/// Power-loss shape derivative,
///   sum_walls int { [2 (c l k / L) f_s - f_s^2/mu] theta_n
///                   + (2c/L)(dl* f_s - l (d_s theta_n) p) } ds.
double grad_JPL(const FlowSolution& fwd, const ChannelGeometry& geom, const SolverConfig& cfg,
                const PerturbationField& theta);

/// Flow-rate shape derivative,
///   sum_walls int { (c l k/L f_s_adj - f_s f_s_adj/mu + c/L) theta_n
///                   + (c/L)(dl* f_s_adj - l (d_s theta_n) p_adj) } ds
///   + [theta_2 u1](z+) - [theta_2 u1](z-),
/// with the endpoint slip taken from the wall data. The adjoint pressure's
/// linear growth across the cell is integrated by parts analytically.
double grad_CQ(const FlowSolution& fwd, const FlowSolution& adj, const ChannelGeometry& geom,
               const SolverConfig& cfg, const PerturbationField& theta);

/// Result of one gradient evaluation at a design point: two linear solves
/// (one forward, one adjoint against the shared factorization), then
/// quadrature over all basis directions.
struct GradientResult {
  GradientVector grad;
  FunctionalValues values;
  int solve_count = 2;
};

GradientResult full_gradient(const WallShapeParams& params, const SolverConfig& cfg,
                             const Targets& targets);

}  // namespace peristokes
