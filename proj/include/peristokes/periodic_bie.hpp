#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <vector>

#include "peristokes/geometry.hpp"

namespace peristokes {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discretization and physics parameters of the periodized solver.
struct SolverConfig {
  int M = 64;                       ///< quadrature nodes per wall
  int K = 96;                       ///< proxy sources on the enclosing circle
  int Mp = 48;                      ///< collocation nodes per end section
  double proxy_radius_factor = 2.0; ///< radius = factor * bounding radius
  double mu = 1.0;                  ///< dynamic viscosity
  double c = 1.0;                   ///< wave speed
  double residual_tol = 1e-8;       ///< relative residual accepted from the dense solve

  void validate() const {
    if (M < 16 || M % 2) throw SolverError("SolverConfig: M must be even, >= 16");
    if (K < 16) throw SolverError("SolverConfig: K must be >= 16");
    if (Mp < 8) throw SolverError("SolverConfig: Mp must be >= 8");
    if (proxy_radius_factor <= 1.0) throw SolverError("SolverConfig: proxy radius factor must exceed 1");
    if (mu <= 0.0 || c < 0.0) throw SolverError("SolverConfig: invalid physics constants");
  }
};

enum class ProblemKind { Forward, Adjoint };

/// Solved flow state: single-layer density on the wall nodes, proxy
/// coefficients, and derived on-wall fields. The decomposition
/// f = -p n + f_s tau holds nodewise.
struct FlowSolution {
  ProblemKind kind = ProblemKind::Forward;
  Eigen::MatrixX2d density_upper, density_lower;  ///< nodal density values
  Eigen::MatrixX2d proxy_coeffs;                  ///< K x 2
  Eigen::MatrixX2d traction_upper, traction_lower;
  Eigen::VectorXd pressure_upper, pressure_lower; ///< p = -f.n, gauged
  Eigen::VectorXd fs_upper, fs_lower;             ///< f_s = f.tau
  double pressure_jump = 0.0;  ///< p(x+L e1) - p(x); 1 for the adjoint
  double residual = 0.0;       ///< relative residual of the block system

  const Eigen::VectorXd& fs(WallSide s) const {
    return s == WallSide::Upper ? fs_upper : fs_lower;
  }
  const Eigen::VectorXd& pressure(WallSide s) const {
    return s == WallSide::Upper ? pressure_upper : pressure_lower;
  }
};

/// Point sample of the flow field.
struct FieldSample {
  Vec2 velocity;
  double pressure = 0.0;
  bool reliable = true;  ///< false within ~5 node spacings of a wall
};

/// Periodized single-layer Stokes solver on one channel cell.
///
/// Velocity representation: near-copy single layer (periodic images
/// n = -1, 0, 1 of both walls) plus K proxy Stokeslets on a circle
/// enclosing the cell, standing in for all farther images. Wall rows get
/// the slip data with Kress log-corrected Nystrom quadrature on the self
/// wall; velocity and traction mismatch between the end sections is
/// collocated at Mp Gauss nodes. The resulting dense block system is
/// solved in the least-squares sense by a rank-revealing complete
/// orthogonal decomposition (the first-kind operator carries a constant-
/// pressure near-nullspace).
class PeriodicStokesSolver {
 public:
  PeriodicStokesSolver(const ChannelGeometry& geom, const SolverConfig& cfg);

  /// Slip-driven problem: u = (c l/L) tau on each wall, periodic field.
  FlowSolution solve_forward() const;

  /// No-slip walls, unit pressure rise across the cell
  /// (p(L,.) - p(0,.) = +1, i.e. traction mismatch -e1).
  FlowSolution solve_adjoint() const;

  /// Solve with caller-supplied boundary data: wall velocities and the
  /// velocity/traction mismatch between the end sections (test fixtures
  /// drive this with non-periodic exterior fields).
  FlowSolution solve_with_data(const Eigen::MatrixX2d& u_wall_upper,
                               const Eigen::MatrixX2d& u_wall_lower,
                               const Eigen::MatrixX2d& velocity_jump,
                               const Eigen::MatrixX2d& traction_jump,
                               double pressure_jump) const;

  /// Velocity and pressure at interior points. Samples closer than about
  /// five node spacings to a wall are flagged unreliable.
  std::vector<FieldSample> eval_field(const FlowSolution& sol,
                                      const std::vector<Vec2>& points) const;

  /// Exact integral of u1 of the discrete representation over the vertical
  /// segment x1 = X between the walls' end heights. Converges only
  /// first-order in M near the wall corners; kept as a mass-conservation
  /// diagnostic. The production flow rate uses the adjoint reciprocity
  /// identity (see functionals).
  double section_flux(const FlowSolution& sol, double X) const;

  const ChannelGeometry& geometry() const { return geom_; }
  const SolverConfig& config() const { return cfg_; }
  const Eigen::MatrixX2d& proxy_points() const { return proxy_; }
  int rows() const { return int(A_.rows()); }
  int cols() const { return int(A_.cols()); }

 private:
  Eigen::VectorXd solve_dense(const Eigen::VectorXd& rhs, double* residual) const;
  FlowSolution finish_solution(const Eigen::VectorXd& sol, ProblemKind kind,
                               double pressure_jump, double residual) const;
  void compute_wall_fields(FlowSolution& s) const;
  Vec2 density_velocity(const FlowSolution& s, const Vec2& x) const;
  double density_pressure(const FlowSolution& s, const Vec2& x) const;

  ChannelGeometry geom_;
  SolverConfig cfg_;
  Vec2 lattice_;               // (L, 0)
  Eigen::MatrixX2d proxy_;     // K x 2 proxy source positions
  Eigen::MatrixXd A_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

}  // namespace peristokes
