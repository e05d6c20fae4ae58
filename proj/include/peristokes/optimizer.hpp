#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peristokes/shape_calculus.hpp"

namespace peristokes {

/// Tuning knobs for the augmented Lagrangian / BFGS solver.
struct OptOptions {
  double sigma0_q = 10.0;
  double sigma0_v = 10.0;     ///< escalated to 100 when the start violates V badly
  bool auto_sigma_v = true;   ///< apply the escalation rule
  double zeta_star = 1e-3;    ///< final constraint tolerance
  double gtol_rel = 1e-4;     ///< inner stop: ||grad L_A||_inf <= gtol_rel * max(1, |L_A|)
  int max_inner = 25;
  int max_outer = 20;
  double armijo_c1 = 1e-4;
  int max_halvings = 30;
  double max_step = 0.25;       ///< cap on the infinity norm of a trial update
  double polish_gtol_rel = 1e-5;  ///< stationarity asked of the final subproblem
  int max_polish_inner = 60;
  std::vector<int> free_indices;  ///< design indices to optimize; empty = all
};

/// One convergence-log record per accepted inner iteration.
struct InnerRecord {
  int m = 0, j = 0;
  double J_PL = 0.0, C_Q = 0.0, C_V = 0.0;
  double grad_inf = 0.0;
  double step = 0.0;
  long solves = 0;
};

/// Augmented Lagrangian outer state.
struct OptState {
  Eigen::Vector2d lambda{0.0, 0.0};  ///< multipliers (Q, V)
  Eigen::Vector2d sigma{10.0, 10.0}; ///< penalties (Q, V)
  double zeta = 0.0;                 ///< current constraint tolerance
  double zeta_star = 1e-3;
  double omega = 0.0;                ///< current inner (stationarity) tolerance
  int m = 0;                         ///< outer iteration
  std::vector<InnerRecord> history;
  long solve_count = 0;
  bool converged = false;
  std::string warning;
};

/// L_A = J - lambda_1 C_Q - lambda_2 C_V + sigma_1/2 C_Q^2 + sigma_2/2 C_V^2.
double augmented_lagrangian_value(const FunctionalValues& fv, const OptState& state);

struct OptResult {
  WallShapeParams shape;
  OptState state;
  FunctionalValues values;
};

/// One unconstrained BFGS minimization of L_A at fixed multipliers.
/// Dense SPD Hessian approximation, Armijo backtracking; trial shapes that
/// fail geometric validity count as failed steps. Appends to state.history
/// and state.solve_count. The stationarity tolerance is state.omega when
/// set (the outer loop loosens early subproblems: fully minimizing the
/// first ones can park the iterate on the flat channel, a stationary point
/// of J and Q from which no multiplier update recovers), else gtol_rel.
WallShapeParams bfgs_minimize(const WallShapeParams& start, OptState& state,
                              const Targets& targets, const SolverConfig& cfg,
                              const OptOptions& opt,
                              FunctionalValues* final_values = nullptr,
                              bool* reached_stationarity = nullptr);

/// Full augmented Lagrangian outer loop. Multipliers update with their own
/// constraints when both violations pass the current tolerance; otherwise
/// the penalties grow tenfold and the tolerance resets. Stops when both
/// |C_Q| and |C_V| fall below zeta_star, or flags non-convergence at the
/// outer cap.
OptResult solve_constrained(const WallShapeParams& start, const Targets& targets,
                            const SolverConfig& cfg, const OptOptions& opt);

/// Convergence log serialization (tab-separated, self-describing header);
/// byte-identical for identical runs.
std::string format_convergence_log(const OptState& state);

}  // namespace peristokes
