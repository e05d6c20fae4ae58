#include <doctest.h>

#include <cmath>

#include "peristokes/spectral.hpp"

using namespace peristokes;

TEST_CASE("trig differentiation matrix is spectrally exact on low modes") {
  const int M = 32;
  const Eigen::MatrixXd D = trig_diff_matrix(M);
  Eigen::VectorXd f(M), df_exact(M);
  for (int j = 0; j < M; ++j) {
    const double t = 2.0 * M_PI * j / M;
    f(j) = std::sin(3 * t) + 0.5 * std::cos(5 * t);
    df_exact(j) = 3 * std::cos(3 * t) - 2.5 * std::sin(5 * t);
  }
  CHECK(((D * f) - df_exact).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("Kress weights integrate log-kernel Fourier modes exactly") {
  const int M = 40;
  const Eigen::VectorXd R = kress_log_weights(M);
  // int_0^{2pi} cos(m tau) log(4 sin^2((t - tau)/2)) dtau = -(2 pi / m) cos(m t)
  for (int m : {1, 2, 5}) {
    for (int i : {0, 3, 17}) {
      const double ti = 2.0 * M_PI * i / M;
      double q = 0.0;
      for (int j = 0; j < M; ++j) q += R((i - j + M) % M) * std::cos(m * 2.0 * M_PI * j / M);
      CHECK(q == doctest::Approx(-(2.0 * M_PI / m) * std::cos(m * ti)).epsilon(1e-12));
    }
  }
  // constant mode integrates to zero (unit-circle log capacity)
  double q0 = 0.0;
  for (int j = 0; j < M; ++j) q0 += R(j);
  CHECK(std::abs(q0) < 1e-12);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly and scales to [a,b]") {
  Eigen::VectorXd x, w;
  gauss_legendre(12, -1.0, 3.0, x, w);
  CHECK(w.sum() == doctest::Approx(4.0).epsilon(1e-14));
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) acc += w(i) * std::pow(x(i), 7);
  CHECK(acc == doctest::Approx((std::pow(3.0, 8) - 1.0) / 8.0).epsilon(1e-13));
  // analytic integrand converges too
  double e = 0.0;
  for (int i = 0; i < x.size(); ++i) e += w(i) * std::exp(x(i));
  CHECK(e == doctest::Approx(std::exp(3.0) - std::exp(-1.0)).epsilon(1e-12));
}
