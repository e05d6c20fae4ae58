#pragma once

#include "peristokes/periodic_bie.hpp"

namespace peristokes {

/// Values of the three shape functionals at one design point.
struct FunctionalValues {
  double J_PL = 0.0;  ///< power loss
  double Q = 0.0;     ///< mass flow rate per wavelength (wave frame)
  double V = 0.0;     ///< cell area
  double C_Q = 0.0;   ///< Q - Q0
  double C_V = 0.0;   ///< V - V0
};

/// Targets for the constrained problem.
struct Targets {
  double Q0 = 0.0;
  double V0 = 0.0;
};

/// Power loss J = int_Gamma f . (u^D + c e1) ds from the forward wall
/// traction. Nonnegative up to quadrature noise.
double power_loss(const FlowSolution& fwd, const ChannelGeometry& geom, const SolverConfig& cfg);

/// Flow rate Q = int_{Gamma_0} u1 dx2 + (c/L)|Omega|. The flux term is
/// evaluated through the reciprocity identity
///   int_{Gamma_0} u1 dx2 = <f_adj, u^D>_Gamma,
/// which needs only wall quadrature of smooth fields.
double flow_rate(const FlowSolution& adj, const ChannelGeometry& geom, const SolverConfig& cfg);

/// Differences against the targets.
void constraint_values(FunctionalValues& fv, const Targets& targets);

/// All functionals for a solved forward/adjoint pair.
FunctionalValues evaluate_functionals(const FlowSolution& fwd, const FlowSolution& adj,
                                      const ChannelGeometry& geom, const SolverConfig& cfg,
                                      const Targets& targets);

}  // namespace peristokes
