#include "peristokes/geometry.hpp"

#include <cmath>

#include "peristokes/spectral.hpp"

namespace peristokes {

namespace {

// basis phi_k, k = 1..2N: cos(k t) for k <= N, sin((k-N) t) beyond
double phi(int k, double t, int N) {
  return k <= N ? std::cos(k * t) : std::sin((k - N) * t);
}
double dphi(int k, double t, int N) {
  return k <= N ? -k * std::sin(k * t) : (k - N) * std::cos((k - N) * t);
}
double ddphi(int k, double t, int N) {
  return k <= N ? -double(k) * k * std::cos(k * t)
                : -double(k - N) * (k - N) * std::sin((k - N) * t);
}

struct WallCoeffs {
  const double* xi1;  // 2N coefficients for x1
  const double* xi2;  // 2N coefficients for x2
  double xi20;        // vertical offset
};

WallCoeffs coeffs_for(const WallShapeParams& p, WallSide side) {
  const int N = p.N;
  if (side == WallSide::Upper)
    return {p.xi.data(), p.xi.data() + 4 * N + 1, p.xi(4 * N)};
  return {p.xi.data() + 2 * N, p.xi.data() + 6 * N + 1, p.xi2_lower_anchor};
}

}  // namespace

void eval_wall_derivs(const WallShapeParams& p, WallSide side, double t,
                      Vec2& x, Vec2& dx, Vec2& ddx) {
  const int N = p.N;
  const WallCoeffs c = coeffs_for(p, side);
  double x1 = p.L / (2.0 * M_PI) * t, x2 = c.xi20;
  for (int k = 1; k <= N; ++k) {  // cos-coefficient subtraction pins x1(0)=0, x2(0)=xi20
    x1 -= c.xi1[k - 1];
    x2 -= c.xi2[k - 1];
  }
  double d1 = p.L / (2.0 * M_PI), d2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int k = 1; k <= 2 * N; ++k) {
    const double ph = phi(k, t, N), dp = dphi(k, t, N), sp = ddphi(k, t, N);
    x1 += c.xi1[k - 1] * ph;
    x2 += c.xi2[k - 1] * ph;
    d1 += c.xi1[k - 1] * dp;
    d2 += c.xi2[k - 1] * dp;
    s1 += c.xi1[k - 1] * sp;
    s2 += c.xi2[k - 1] * sp;
  }
  x << x1, x2;
  dx << d1, d2;
  ddx << s1, s2;
}

Vec2 eval_wall(const WallShapeParams& p, WallSide side, double t) {
  Vec2 x, dx, ddx;
  eval_wall_derivs(p, side, t, x, dx, ddx);
  return x;
}

void frenet_from_derivs(const Vec2& dx, const Vec2& ddx, WallSide side,
                        Vec2& tau, Vec2& n, double& kappa, double& g) {
  g = dx.norm();
  tau = -dx / g;  // leftwards
  const double kstd = (dx(0) * ddx(1) - dx(1) * ddx(0)) / (g * g * g);
  if (side == WallSide::Upper) {
    n << tau(1), -tau(0);
    kappa = kstd;
  } else {
    n << -tau(1), tau(0);
    kappa = -kstd;
  }
}

DiscretizedWall discretize_wall(const WallShapeParams& p, WallSide side, int M) {
  if (M < 16 || M % 2 != 0) throw GeometryError("discretize_wall: M must be even, >= 16");
  DiscretizedWall w;
  w.side = side;
  w.M = M;
  w.t.resize(M);
  w.x.resize(M, 2);
  w.tau.resize(M, 2);
  w.n.resize(M, 2);
  w.kappa.resize(M);
  w.g.resize(M);
  w.w.resize(M);
  const double dt = 2.0 * M_PI / M;
  for (int j = 0; j < M; ++j) {
    const double t = dt * j;
    Vec2 x, dx, ddx, tau, n;
    double kap, g;
    eval_wall_derivs(p, side, t, x, dx, ddx);
    frenet_from_derivs(dx, ddx, side, tau, n, kap, g);
    if (g < 1e-10) throw GeometryError("discretize_wall: degenerate parametrization (|dx/dt| ~ 0)");
    w.t(j) = t;
    w.x.row(j) = x.transpose();
    w.tau.row(j) = tau.transpose();
    w.n.row(j) = n.transpose();
    w.kappa(j) = kap;
    w.g(j) = g;
    w.w(j) = g * dt;
  }
  w.ell = w.w.sum();
  return w;
}

double channel_volume(const ChannelGeometry& geom) {
  const WallShapeParams& p = geom.params;
  double vol = 0.0;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const double sgn = side == WallSide::Upper ? 1.0 : -1.0;
    const int M = w.M;
    const double dt = 2.0 * M_PI / M;
    // int (-x1 x2' + x2 x1') dt with x1 = (L/2pi) t + periodic part;
    // the t-linear piece integrates by parts: int t x2' dt = 2pi x2(2pi) - int x2 dt.
    double per = 0.0, ix2 = 0.0;
    for (int j = 0; j < M; ++j) {
      Vec2 x, dx, ddx;
      eval_wall_derivs(p, side, w.t(j), x, dx, ddx);
      const double x1_tilde = x(0) - p.L / (2.0 * M_PI) * w.t(j);
      per += (-x1_tilde * dx(1) + x(1) * dx(0)) * dt;
      ix2 += x(1) * dt;
    }
    const double x2_end = eval_wall(p, side, 2.0 * M_PI)(1);
    const double lin = -(p.L / (2.0 * M_PI)) * (2.0 * M_PI * x2_end - ix2);
    vol += sgn * 0.5 * (per + lin);
  }
  vol += 0.5 * p.L * (geom.z_plus(1) - geom.z_minus(1));
  if (vol <= 0.0) throw GeometryError("channel_volume: non-positive area (inverted orientation?)");
  return vol;
}

ChannelGeometry make_channel_geometry(const WallShapeParams& p, int M, int Mp) {
  ChannelGeometry geom;
  geom.params = p;
  geom.L = p.L;
  geom.upper = discretize_wall(p, WallSide::Upper, M);
  geom.lower = discretize_wall(p, WallSide::Lower, M);
  geom.z_plus = eval_wall(p, WallSide::Upper, 2.0 * M_PI);
  geom.z_minus = eval_wall(p, WallSide::Lower, 2.0 * M_PI);

  // vertical-gap validity check on a refined parameter sample
  const int S = 4 * M;
  double min_gap = std::numeric_limits<double>::max();
  for (int j = 0; j < S; ++j) {
    const double t = 2.0 * M_PI * j / S;
    min_gap = std::min(min_gap, eval_wall(p, WallSide::Upper, t)(1) -
                                    eval_wall(p, WallSide::Lower, t)(1));
  }
  if (min_gap < 1e-3 * p.L)
    throw GeometryError("make_channel_geometry: wall gap below 1e-3 L (pinched or crossing walls)");

  geom.volume = channel_volume(geom);
  gauss_legendre(Mp, geom.z_minus(1), geom.z_plus(1), geom.gammaL_nodes, geom.gammaL_weights);
  return geom;
}

PerturbationField perturbation_from_nodal(const ChannelGeometry& geom,
                                          const Eigen::MatrixX2d& theta_upper,
                                          const Eigen::MatrixX2d& theta_lower,
                                          double theta2_at_zplus,
                                          double theta2_at_zminus) {
  PerturbationField f;
  f.theta_upper = theta_upper;
  f.theta_lower = theta_lower;
  f.theta2_at_zplus = theta2_at_zplus;
  f.theta2_at_zminus = theta2_at_zminus;
  for (WallSide side : {WallSide::Upper, WallSide::Lower}) {
    const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
    const Eigen::MatrixX2d& th = side == WallSide::Upper ? theta_upper : theta_lower;
    Eigen::VectorXd ts(w.M), tn(w.M);
    for (int j = 0; j < w.M; ++j) {
      ts(j) = th.row(j).dot(w.tau.row(j));
      tn(j) = th.row(j).dot(w.n.row(j));
    }
    const Eigen::MatrixXd D = trig_diff_matrix(w.M);
    Eigen::VectorXd dstn = -(D * tn).cwiseQuotient(w.g);  // d/ds = -(1/g) d/dt
    if (side == WallSide::Upper) {
      f.theta_s_upper = ts;
      f.theta_n_upper = tn;
      f.ds_theta_n_upper = dstn;
    } else {
      f.theta_s_lower = ts;
      f.theta_n_lower = tn;
      f.ds_theta_n_lower = dstn;
    }
  }
  return f;
}

PerturbationField basis_perturbation(const WallShapeParams& p, int k,
                                     const ChannelGeometry& geom) {
  const int N = p.N;
  if (k < 0 || k >= p.num_params())
    throw std::out_of_range("basis_perturbation: parameter index out of range");
  const int M = geom.upper.M;
  Eigen::MatrixX2d thu = Eigen::MatrixX2d::Zero(M, 2);
  Eigen::MatrixX2d thl = Eigen::MatrixX2d::Zero(M, 2);

  WallSide side;
  int comp, kk;  // component (0:x1, 1:x2) and basis index, kk=0 means constant
  if (k < 2 * N) {
    side = WallSide::Upper;
    comp = 0;
    kk = k + 1;
  } else if (k < 4 * N) {
    side = WallSide::Lower;
    comp = 0;
    kk = k - 2 * N + 1;
  } else if (k == 4 * N) {
    side = WallSide::Upper;
    comp = 1;
    kk = 0;
  } else if (k < 6 * N + 1) {
    side = WallSide::Upper;
    comp = 1;
    kk = k - 4 * N;
  } else {
    side = WallSide::Lower;
    comp = 1;
    kk = k - 6 * N;
  }

  const DiscretizedWall& w = side == WallSide::Upper ? geom.upper : geom.lower;
  Eigen::MatrixX2d& th = side == WallSide::Upper ? thu : thl;
  for (int j = 0; j < M; ++j) {
    const double v = kk == 0 ? 1.0 : phi(kk, w.t(j), N) - (kk <= N ? 1.0 : 0.0);
    th(j, comp) = v;
  }
  const double at_end = kk == 0 ? 1.0 : 0.0;  // phi_k(2pi) cancels the cos subtraction
  const double th2p = (side == WallSide::Upper && comp == 1) ? at_end : 0.0;
  const double th2m = (side == WallSide::Lower && comp == 1) ? at_end : 0.0;
  return perturbation_from_nodal(geom, thu, thl, th2p, th2m);
}

double dl_star(const DiscretizedWall& wall, const Eigen::VectorXd& theta_n) {
  return -(wall.kappa.cwiseProduct(theta_n).cwiseProduct(wall.w)).sum();
}

}  // namespace peristokes
