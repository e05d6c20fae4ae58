#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "peristokes/kernels.hpp"

namespace peristokes {

/// Thrown when a shape is degenerate or invalid (pinched channel,
/// vanishing parametrization speed, inverted orientation, ...).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class WallSide { Upper, Lower };

/// Trigonometric wall parametrization of both channel walls over one
/// wavelength. The design vector xi has length 8N+1, ordered as
///   { xi1+_k (k=1..2N), xi1-_k (k=1..2N), xi2+_0, xi2+_k (k=1..2N),
///     xi2-_k (k=1..2N) },
/// with basis phi_k = cos(k t) for k<=N and sin((k-N) t) for k>N.
/// The construction pins x1(0)=0, x1(2pi)=L for every xi; the lower-wall
/// vertical offset xi2-_0 (`xi2_lower_anchor`) is fixed, never a design
/// parameter.
struct WallShapeParams {
  int N = 0;
  Eigen::VectorXd xi;             ///< free design parameters, length 8N+1
  double xi2_lower_anchor = -1.0; ///< pinned x2 of the lower wall at t=0
  double L = 2.0 * M_PI;          ///< wavelength

  WallShapeParams() = default;
  WallShapeParams(int N_, double L_ = 2.0 * M_PI, double anchor = -1.0)
      : N(N_), xi(Eigen::VectorXd::Zero(8 * N_ + 1)), xi2_lower_anchor(anchor), L(L_) {}

  int num_params() const { return 8 * N + 1; }
  /// Index of xi2+_0 (the upper-wall vertical offset) in xi.
  int index_xi2_upper0() const { return 4 * N; }
};

/// Wall position x(t) = (x1, x2) at parameter t in [0, 2pi].
Vec2 eval_wall(const WallShapeParams& p, WallSide side, double t);

/// Position and first/second t-derivatives of the wall parametrization.
void eval_wall_derivs(const WallShapeParams& p, WallSide side, double t,
                      Vec2& x, Vec2& dx, Vec2& ddx);

/// One wall sampled at M uniform parameter nodes with Frenet data.
///
/// Conventions (fixed once, verified by the closed-curve 2*pi fixture and
/// the flat-channel plug-flow check):
///   tau   = -x'(t)/|x'(t)|          (arclength runs "leftwards", both walls)
///   n     = ( tau2, -tau1) on the upper wall   (outward from the fluid)
///         = (-tau2,  tau1) on the lower wall
///   kappa = tau_,s . n  with d/ds = -(1/g) d/dt
/// so kappa equals the standard left-to-right signed curvature on the upper
/// wall and its negative on the lower wall.
struct DiscretizedWall {
  WallSide side = WallSide::Upper;
  int M = 0;
  Eigen::VectorXd t;        ///< parameter grid, t_j = 2*pi*j/M
  Eigen::MatrixX2d x;       ///< node positions
  Eigen::MatrixX2d tau;     ///< unit tangents (leftwards)
  Eigen::MatrixX2d n;       ///< unit outward normals
  Eigen::VectorXd kappa;    ///< signed curvature
  Eigen::VectorXd g;        ///< parametrization speed |dx/dt|
  Eigen::VectorXd w;        ///< arclength quadrature weights g_j * 2*pi/M
  double ell = 0.0;         ///< total arclength

  Vec2 node(int j) const { return x.row(j).transpose(); }
  Vec2 tangent(int j) const { return tau.row(j).transpose(); }
  Vec2 normal(int j) const { return n.row(j).transpose(); }
};

/// Sample a wall at M uniform nodes. Tangent, normal and curvature come
/// from the closed-form derivatives of the trigonometric basis.
/// Throws GeometryError if |dx/dt| < 1e-10 anywhere.
DiscretizedWall discretize_wall(const WallShapeParams& p, WallSide side, int M);

/// Frenet data from parametrization derivatives; shared by discretize_wall
/// and the closed-curve test fixtures.
void frenet_from_derivs(const Vec2& dx, const Vec2& ddx, WallSide side,
                        Vec2& tau, Vec2& n, double& kappa, double& g);

/// Both walls plus derived cell quantities.
struct ChannelGeometry {
  WallShapeParams params;
  DiscretizedWall upper, lower;
  double L = 0.0;
  double volume = 0.0;    ///< |Omega|, area of one cell
  Vec2 z_plus, z_minus;   ///< endpoints of the x1 = L end section
  Eigen::VectorXd gammaL_nodes;   ///< Gauss-Legendre x2 nodes on the end section
  Eigen::VectorXd gammaL_weights;
};

/// Discretize both walls, compute |Omega| and the end-section quadrature,
/// and validate the shape (positive volume, minimum vertical wall gap
/// > 1e-3 L). Mp is the end-section node count.
ChannelGeometry make_channel_geometry(const WallShapeParams& p, int M, int Mp = 32);

/// Cell area by the divergence theorem over walls + end sections. The
/// linear-in-t part of x1 is integrated by parts analytically so only
/// periodic integrands meet the trapezoidal rule.
double channel_volume(const ChannelGeometry& geom);

/// Transformation-velocity field induced by a shape-parameter perturbation,
/// sampled on both walls.
struct PerturbationField {
  Eigen::MatrixX2d theta_upper, theta_lower;   ///< nodal field values
  Eigen::VectorXd theta_s_upper, theta_s_lower;
  Eigen::VectorXd theta_n_upper, theta_n_lower;
  Eigen::VectorXd ds_theta_n_upper, ds_theta_n_lower;  ///< arclength derivative
  double theta2_at_zplus = 0.0;   ///< vertical component at z+
  double theta2_at_zminus = 0.0;  ///< vertical component at z- (0 if admissible)

  const Eigen::VectorXd& theta_n(WallSide s) const {
    return s == WallSide::Upper ? theta_n_upper : theta_n_lower;
  }
  const Eigen::VectorXd& ds_theta_n(WallSide s) const {
    return s == WallSide::Upper ? ds_theta_n_upper : ds_theta_n_lower;
  }
};

/// Build a PerturbationField from nodal values of theta on both walls
/// (projection on (tau, n) plus spectral differentiation of theta_n in t).
PerturbationField perturbation_from_nodal(const ChannelGeometry& geom,
                                          const Eigen::MatrixX2d& theta_upper,
                                          const Eigen::MatrixX2d& theta_lower,
                                          double theta2_at_zplus,
                                          double theta2_at_zminus);

/// Exact field d x / d xi_k for design parameter k (the parametrization is
/// linear in xi, so this is exact, not a finite difference).
PerturbationField basis_perturbation(const WallShapeParams& p, int k,
                                     const ChannelGeometry& geom);

/// Arclength rate of one wall under a normal perturbation:
///   dl* = -sum_j kappa_j theta_n(t_j) w_j.
double dl_star(const DiscretizedWall& wall, const Eigen::VectorXd& theta_n);

}  // namespace peristokes
