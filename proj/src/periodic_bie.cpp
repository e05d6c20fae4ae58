#include "peristokes/periodic_bie.hpp"

#include <cmath>

#include "peristokes/spectral.hpp"

namespace peristokes {

namespace {

const DiscretizedWall& wall_of(const ChannelGeometry& g, int wi) {
  return wi == 0 ? g.upper : g.lower;
}

// exact integral of the Stokeslet's u1 row over a vertical segment:
// returns (int S_11 ds, int S_12 ds) for targets (X, s), s in [a, b].
Eigen::RowVector2d stokeslet_u1_segment(double X, double a, double b,
                                        const Vec2& y, double mu) {
  const double D = X - y(0);
  const double ua = a - y(1), ub = b - y(1);
  auto ilog = [&](double u) {  // int log(D^2+u^2) du
    if (D == 0.0) return u == 0.0 ? 0.0 : u * std::log(u * u) - 2.0 * u;
    return u * std::log(D * D + u * u) - 2.0 * u + 2.0 * D * std::atan(u / D);
  };
  const double I_log = -0.5 * (ilog(ub) - ilog(ua));
  double I11 = 0.0, I12 = 0.0;
  if (D != 0.0) {
    I11 = D * (std::atan(ub / D) - std::atan(ua / D));
    I12 = 0.5 * D * (std::log(D * D + ub * ub) - std::log(D * D + ua * ua));
  }
  return (1.0 / (4.0 * M_PI * mu)) * Eigen::RowVector2d(I_log + I11, I12);
}

}  // namespace

PeriodicStokesSolver::PeriodicStokesSolver(const ChannelGeometry& geom, const SolverConfig& cfg)
    : geom_(geom), cfg_(cfg) {
  cfg_.validate();
  if (geom_.upper.M != cfg_.M || geom_.lower.M != cfg_.M)
    throw SolverError("PeriodicStokesSolver: geometry node count does not match config M");
  lattice_ = Vec2(geom_.L, 0.0);

  // proxy circle around the cell
  Vec2 lo = geom_.upper.x.colwise().minCoeff().cwiseMin(geom_.lower.x.colwise().minCoeff()).transpose();
  Vec2 hi = geom_.upper.x.colwise().maxCoeff().cwiseMax(geom_.lower.x.colwise().maxCoeff()).transpose();
  const Vec2 center = 0.5 * (lo + hi);
  double rad = 0.0;
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wall_of(geom_, wi);
    for (int j = 0; j < w.M; ++j) rad = std::max(rad, (w.node(j) - center).norm());
  }
  proxy_.resize(cfg_.K, 2);
  for (int m = 0; m < cfg_.K; ++m) {
    const double th = 2.0 * M_PI * m / cfg_.K;
    proxy_.row(m) = (center + cfg_.proxy_radius_factor * rad * Vec2(std::cos(th), std::sin(th))).transpose();
  }

  // ---- assemble the block system ----
  const int M = cfg_.M, K = cfg_.K, Mp = cfg_.Mp;
  const double mu = cfg_.mu;
  const int nrow = 4 * M + 4 * Mp, ncol = 4 * M + 2 * K;
  A_.setZero(nrow, ncol);
  const Eigen::VectorXd R = kress_log_weights(M);
  const double dt = 2.0 * M_PI / M;

  // wall velocity rows: on-wall limit of the near-copy single layer + proxies
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& wt = wall_of(geom_, wi);
    for (int i = 0; i < M; ++i) {
      const Vec2 xi = wt.node(i);
      const int row = 2 * (wi * M + i);
      for (int wj = 0; wj < 2; ++wj) {
        const DiscretizedWall& ws = wall_of(geom_, wj);
        for (int j = 0; j < M; ++j) {
          const int col = 2 * (wj * M + j);
          Mat2 blk;
          if (wi == wj) {
            // Kress-corrected block: split off the log(4 sin^2) part with
            // coefficient -g/(8 pi mu); the wrapped parameter difference
            // pairs the correction with the nearest periodic image.
            Mat2 F2;
            if (i == j) {
              F2 = (wt.g(i) / (4.0 * M_PI * mu)) *
                   (-std::log(wt.g(i)) * Mat2::Identity() +
                    wt.tangent(i) * wt.tangent(i).transpose());
              for (int nn : {-1, 1})
                F2 += stokeslet(xi, ws.node(j) + nn * lattice_, mu) * ws.g(j);
            } else {
              const double s2 = 4.0 * std::pow(std::sin((wt.t(i) - wt.t(j)) / 2.0), 2);
              F2 = (ws.g(j) / (8.0 * M_PI * mu)) * std::log(s2) * Mat2::Identity();
              for (int nn : {-1, 0, 1})
                F2 += stokeslet(xi, ws.node(j) + nn * lattice_, mu) * ws.g(j);
            }
            blk = R((i - j + M) % M) * (-ws.g(j) / (8.0 * M_PI * mu)) * Mat2::Identity() + dt * F2;
          } else {
            blk.setZero();
            for (int nn : {-1, 0, 1})
              blk += stokeslet(xi, ws.node(j) + nn * lattice_, mu) * ws.g(j);
            blk *= dt;
          }
          A_.block<2, 2>(row, col) = blk;
        }
      }
      for (int m = 0; m < K; ++m)
        A_.block<2, 2>(row, 4 * M + 2 * m) = stokeslet(xi, proxy_.row(m).transpose(), mu);
    }
  }

  // mismatch rows between the end sections; the shared-copy contributions
  // cancel exactly, leaving well-separated kernels.
  const Vec2 e1(1.0, 0.0);
  for (int l = 0; l < Mp; ++l) {
    const Vec2 q(0.0, geom_.gammaL_nodes(l));
    const int rowv = 4 * M + 2 * l;
    const int rowt = 4 * M + 2 * Mp + 2 * l;
    for (int wj = 0; wj < 2; ++wj) {
      const DiscretizedWall& ws = wall_of(geom_, wj);
      for (int j = 0; j < M; ++j) {
        const int col = 2 * (wj * M + j);
        const Vec2 y = ws.node(j);
        A_.block<2, 2>(rowv, col) =
            (stokeslet(q, y - 2 * lattice_, mu) - stokeslet(q, y + lattice_, mu)) * ws.w(j);
        A_.block<2, 2>(rowt, col) =
            (traction_kernel(q, y - 2 * lattice_, e1) - traction_kernel(q, y + lattice_, e1)) * ws.w(j);
      }
    }
    for (int m = 0; m < K; ++m) {
      const Vec2 ym = proxy_.row(m).transpose();
      A_.block<2, 2>(rowv, 4 * M + 2 * m) = stokeslet(q + lattice_, ym, mu) - stokeslet(q, ym, mu);
      A_.block<2, 2>(rowt, 4 * M + 2 * m) =
          traction_kernel(q + lattice_, ym, e1) - traction_kernel(q, ym, e1);
    }
  }

  cod_.compute(A_);
  if (cod_.info() != Eigen::Success)
    throw SolverError("PeriodicStokesSolver: factorization failed");
}

Eigen::VectorXd PeriodicStokesSolver::solve_dense(const Eigen::VectorXd& rhs, double* residual) const {
  Eigen::VectorXd sol = cod_.solve(rhs);
  const double res = (A_ * sol - rhs).norm() / std::max(1.0, rhs.norm());
  if (residual) *residual = res;
  if (!sol.allFinite()) throw SolverError("PeriodicStokesSolver: dense solve produced non-finite values");
  if (res > cfg_.residual_tol) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "PeriodicStokesSolver: block-system residual %.3e exceeds %.1e",
                  res, cfg_.residual_tol);
    throw SolverError(msg);
  }
  return sol;
}

FlowSolution PeriodicStokesSolver::finish_solution(const Eigen::VectorXd& sol, ProblemKind kind,
                                                   double pressure_jump, double residual) const {
  const int M = cfg_.M, K = cfg_.K;
  FlowSolution s;
  s.kind = kind;
  s.pressure_jump = pressure_jump;
  s.residual = residual;
  s.density_upper.resize(M, 2);
  s.density_lower.resize(M, 2);
  s.proxy_coeffs.resize(K, 2);
  for (int j = 0; j < M; ++j) {
    s.density_upper.row(j) = sol.segment<2>(2 * j).transpose();
    s.density_lower.row(j) = sol.segment<2>(2 * (M + j)).transpose();
  }
  for (int m = 0; m < K; ++m) s.proxy_coeffs.row(m) = sol.segment<2>(4 * M + 2 * m).transpose();
  compute_wall_fields(s);
  return s;
}

FlowSolution PeriodicStokesSolver::solve_forward() const {
  const int M = cfg_.M, Mp = cfg_.Mp;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * M + 4 * Mp);
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wall_of(geom_, wi);
    const double speed = cfg_.c * w.ell / geom_.L;
    for (int j = 0; j < M; ++j) b.segment<2>(2 * (wi * M + j)) = speed * w.tangent(j);
  }
  double res = 0.0;
  const Eigen::VectorXd sol = solve_dense(b, &res);
  return finish_solution(sol, ProblemKind::Forward, 0.0, res);
}

FlowSolution PeriodicStokesSolver::solve_adjoint() const {
  const int M = cfg_.M, Mp = cfg_.Mp;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * M + 4 * Mp);
  // traction mismatch -e1 <=> pressure rise +1 across the cell
  for (int l = 0; l < Mp; ++l) b(4 * M + 2 * Mp + 2 * l) = -1.0;
  double res = 0.0;
  const Eigen::VectorXd sol = solve_dense(b, &res);
  return finish_solution(sol, ProblemKind::Adjoint, 1.0, res);
}

FlowSolution PeriodicStokesSolver::solve_with_data(const Eigen::MatrixX2d& u_wall_upper,
                                                   const Eigen::MatrixX2d& u_wall_lower,
                                                   const Eigen::MatrixX2d& velocity_jump,
                                                   const Eigen::MatrixX2d& traction_jump,
                                                   double pressure_jump) const {
  const int M = cfg_.M, Mp = cfg_.Mp;
  if (u_wall_upper.rows() != M || u_wall_lower.rows() != M ||
      velocity_jump.rows() != Mp || traction_jump.rows() != Mp)
    throw SolverError("solve_with_data: boundary data size mismatch");
  Eigen::VectorXd b(4 * M + 4 * Mp);
  for (int j = 0; j < M; ++j) {
    b.segment<2>(2 * j) = u_wall_upper.row(j).transpose();
    b.segment<2>(2 * (M + j)) = u_wall_lower.row(j).transpose();
  }
  for (int l = 0; l < Mp; ++l) {
    b.segment<2>(4 * M + 2 * l) = velocity_jump.row(l).transpose();
    b.segment<2>(4 * M + 2 * Mp + 2 * l) = traction_jump.row(l).transpose();
  }
  double res = 0.0;
  const Eigen::VectorXd sol = solve_dense(b, &res);
  return finish_solution(sol, ProblemKind::Forward, pressure_jump, res);
}

void PeriodicStokesSolver::compute_wall_fields(FlowSolution& s) const {
  const int M = cfg_.M, K = cfg_.K;
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& wt = wall_of(geom_, wi);
    Eigen::MatrixX2d f(M, 2);
    for (int i = 0; i < M; ++i) {
      const Vec2 xi = wt.node(i);
      const Vec2 ni = wt.normal(i);
      // interior limit of the single-layer traction: +psi/2 jump plus the
      // traction-kernel sum with the smooth curvature diagonal.
      Vec2 acc = 0.5 * (wi == 0 ? s.density_upper : s.density_lower).row(i).transpose();
      for (int wj = 0; wj < 2; ++wj) {
        const DiscretizedWall& ws = wall_of(geom_, wj);
        const Eigen::MatrixX2d& psi = wj == 0 ? s.density_upper : s.density_lower;
        for (int j = 0; j < M; ++j) {
          const Vec2 pj = psi.row(j).transpose();
          for (int nn : {-1, 0, 1}) {
            if (wi == wj && i == j && nn == 0) {
              acc += (wt.kappa(i) / (2.0 * M_PI)) * wt.tangent(i) * (wt.tangent(i).dot(pj)) * ws.w(j);
            } else {
              acc += traction_kernel(xi, ws.node(j) + nn * lattice_, ni) * pj * ws.w(j);
            }
          }
        }
      }
      for (int m = 0; m < K; ++m)
        acc += traction_kernel(xi, proxy_.row(m).transpose(), ni) * s.proxy_coeffs.row(m).transpose();
      f.row(i) = acc.transpose();
    }
    if (wi == 0)
      s.traction_upper = f;
    else
      s.traction_lower = f;
  }

  auto split = [&](const DiscretizedWall& w, const Eigen::MatrixX2d& f,
                   Eigen::VectorXd& p, Eigen::VectorXd& fs) {
    p.resize(M);
    fs.resize(M);
    for (int i = 0; i < M; ++i) {
      p(i) = -f.row(i).dot(w.n.row(i));
      fs(i) = f.row(i).dot(w.tau.row(i));
    }
  };
  split(geom_.upper, s.traction_upper, s.pressure_upper, s.fs_upper);
  split(geom_.lower, s.traction_lower, s.pressure_lower, s.fs_lower);

  // pressure gauge
  double shift = 0.0;
  if (s.kind == ProblemKind::Forward) {
    // zero arclength-mean over both walls
    shift = (s.pressure_upper.dot(geom_.upper.w) + s.pressure_lower.dot(geom_.lower.w)) /
            (geom_.upper.w.sum() + geom_.lower.w.sum());
  } else {
    // pin p = 0 at the midpoint of the x1 = 0 section
    const Vec2 mid(0.0, 0.5 * (geom_.z_minus(1) + geom_.z_plus(1)));
    shift = density_pressure(s, mid);
  }
  s.pressure_upper.array() -= shift;
  s.pressure_lower.array() -= shift;
  for (int i = 0; i < M; ++i) {  // keep f = -p n + fs tau consistent with the gauge
    s.traction_upper.row(i) += shift * geom_.upper.n.row(i);
    s.traction_lower.row(i) += shift * geom_.lower.n.row(i);
  }
}

Vec2 PeriodicStokesSolver::density_velocity(const FlowSolution& s, const Vec2& x) const {
  Vec2 u = Vec2::Zero();
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wall_of(geom_, wi);
    const Eigen::MatrixX2d& psi = wi == 0 ? s.density_upper : s.density_lower;
    for (int j = 0; j < w.M; ++j) {
      const Vec2 pj = psi.row(j).transpose();
      for (int nn : {-1, 0, 1}) u += stokeslet(x, w.node(j) + nn * lattice_, cfg_.mu) * pj * w.w(j);
    }
  }
  for (int m = 0; m < cfg_.K; ++m)
    u += stokeslet(x, proxy_.row(m).transpose(), cfg_.mu) * s.proxy_coeffs.row(m).transpose();
  return u;
}

double PeriodicStokesSolver::density_pressure(const FlowSolution& s, const Vec2& x) const {
  double p = 0.0;
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wall_of(geom_, wi);
    const Eigen::MatrixX2d& psi = wi == 0 ? s.density_upper : s.density_lower;
    for (int j = 0; j < w.M; ++j) {
      const Vec2 pj = psi.row(j).transpose();
      for (int nn : {-1, 0, 1}) p += pressure_kernel(x, w.node(j) + nn * lattice_).dot(pj) * w.w(j);
    }
  }
  for (int m = 0; m < cfg_.K; ++m)
    p += pressure_kernel(x, proxy_.row(m).transpose()).dot(s.proxy_coeffs.row(m).transpose());
  return p;
}

std::vector<FieldSample> PeriodicStokesSolver::eval_field(const FlowSolution& sol,
                                                          const std::vector<Vec2>& points) const {
  // distance bound for plain-quadrature accuracy
  double max_spacing = 0.0;
  for (int wi = 0; wi < 2; ++wi)
    max_spacing = std::max(max_spacing, wall_of(geom_, wi).w.maxCoeff());
  const double margin = 5.0 * max_spacing;

  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const Vec2& x : points) {
    FieldSample fsmp;
    fsmp.velocity = density_velocity(sol, x);
    fsmp.pressure = density_pressure(sol, x);
    double dist = std::numeric_limits<double>::max();
    for (int wi = 0; wi < 2; ++wi) {
      const DiscretizedWall& w = wall_of(geom_, wi);
      for (int j = 0; j < w.M; ++j) dist = std::min(dist, (x - w.node(j)).norm());
    }
    fsmp.reliable = dist > margin;
    out.push_back(fsmp);
  }
  return out;
}

double PeriodicStokesSolver::section_flux(const FlowSolution& sol, double X) const {
  // wall heights at x1 = X by bisection on the (monotone) x1 parametrization
  auto wall_y = [&](WallSide side) {
    double lo = 0.0, hi = 2.0 * M_PI;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (eval_wall(geom_.params, side, mid)(0) < X ? lo : hi) = mid;
    }
    return eval_wall(geom_.params, side, 0.5 * (lo + hi))(1);
  };
  const double a = wall_y(WallSide::Lower), b = wall_y(WallSide::Upper);
  double flux = 0.0;
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wall_of(geom_, wi);
    const Eigen::MatrixX2d& psi = wi == 0 ? sol.density_upper : sol.density_lower;
    for (int j = 0; j < w.M; ++j) {
      const Vec2 pj = psi.row(j).transpose();
      for (int nn : {-1, 0, 1})
        flux += stokeslet_u1_segment(X, a, b, w.node(j) + nn * lattice_, cfg_.mu).dot(pj) * w.w(j);
    }
  }
  for (int m = 0; m < cfg_.K; ++m)
    flux += stokeslet_u1_segment(X, a, b, proxy_.row(m).transpose(), cfg_.mu)
                .dot(sol.proxy_coeffs.row(m).transpose());
  return flux;
}

}  // namespace peristokes
