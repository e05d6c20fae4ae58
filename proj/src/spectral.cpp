#include "peristokes/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace peristokes {

Eigen::MatrixXd trig_diff_matrix(int M) {
  if (M < 2 || M % 2 != 0) throw std::invalid_argument("trig_diff_matrix: M must be even, >= 2");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j) {
    for (int k = 0; k < M; ++k) {
      if (j == k) continue;
      const double sgn = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      D(j, k) = 0.5 * sgn / std::tan((j - k) * M_PI / M);
    }
  }
  return D;
}

Eigen::VectorXd kress_log_weights(int M) {
  if (M < 4 || M % 2 != 0) throw std::invalid_argument("kress_log_weights: M must be even, >= 4");
  const int n = M / 2;
  Eigen::VectorXd R(M);
  for (int k = 0; k < M; ++k) {
    const double d = 2.0 * M_PI * k / M;
    double s = 0.0;
    for (int m = 1; m < n; ++m) s += std::cos(m * d) / m;
    R(k) = -(4.0 * M_PI / M) * s - (4.0 * M_PI / (M * double(M))) * std::cos(n * d);
  }
  return R;
}

void gauss_legendre(int n, double a, double b,
                    Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on P_n, nodes in (-1,1), symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes(i) = -x;
    nodes(n - 1 - i) = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights(i) = w;
    weights(n - 1 - i) = w;
  }
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  nodes = (nodes.array() * half + mid).matrix();
  weights *= half;
}

}  // namespace peristokes
