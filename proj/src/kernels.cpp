#include "peristokes/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace peristokes {

Mat2 stokeslet(const Vec2& x, const Vec2& y, double mu) {
  const Vec2 r = x - y;
  const double r2 = r.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("stokeslet: coincident source and target");
  const double c = 1.0 / (4.0 * M_PI * mu);
  Mat2 S = (r * r.transpose()) / r2;
  S.diagonal().array() += -0.5 * std::log(r2);
  return c * S;
}

Vec2 pressure_kernel(const Vec2& x, const Vec2& y) {
  const Vec2 r = x - y;
  const double r2 = r.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("pressure_kernel: coincident source and target");
  return r / (2.0 * M_PI * r2);
}

Mat2 traction_kernel(const Vec2& x, const Vec2& y, const Vec2& n_x) {
  const Vec2 r = x - y;
  const double r2 = r.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("traction_kernel: coincident source and target");
  return (-1.0 / M_PI) * (r.dot(n_x) / (r2 * r2)) * (r * r.transpose());
}

}  // namespace peristokes
