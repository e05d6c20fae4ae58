#pragma once

#include <Eigen/Dense>

namespace peristokes {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Free-space 2D Stokes single-layer (Stokeslet) kernel:
///   S(x,y) = (1/4*pi*mu) (-log|r| I + r⊗r/|r|^2),  r = x - y.
/// Velocity at x per unit point force at y. Throws on coincident points.
Mat2 stokeslet(const Vec2& x, const Vec2& y, double mu);

/// Pressure kernel associated with the Stokeslet:
///   Q(x,y) = (1/2*pi) r/|r|^2.
Vec2 pressure_kernel(const Vec2& x, const Vec2& y);

/// Traction kernel: stress of the Stokeslet field contracted with the
/// target normal n_x,
///   T(x,y) = -(1/pi) (r⊗r/|r|^2) (r.n_x/|r|^2).
/// Independent of viscosity. Throws on coincident points.
Mat2 traction_kernel(const Vec2& x, const Vec2& y, const Vec2& n_x);

}  // namespace peristokes
