#include "rds/refine.hpp"

#include <stdexcept>

namespace rds {

double gamma_schedule(double t, const NoiseSchedule& schedule) {
  const double s = schedule.sigma(t);
  if (!(s > 0)) throw std::domain_error("gamma_schedule: sigma_t is zero at t = 0");
  return 1.0 / s;
}

Refined refine_measurement(const Tensor& y, const Tensor& ax0hat, const RefineParams& p) {
  require_same_shape(y, ax0hat, "refine_measurement");
  if (p.sigma < 0) throw std::invalid_argument("refine_measurement: sigma must be >= 0");
  if (!(p.gamma_t > 0)) throw std::invalid_argument("refine_measurement: gamma_t must be positive");

  const double s2 = p.sigma * p.sigma;
  const double g2 = p.gamma_t * p.gamma_t;
  const double denom = g2 + s2;

  Refined out;
  out.noise_estimate = y.with_values(s2 / denom * (y.array() - ax0hat.array()));
  out.ybar = y.with_values(y.array() - out.noise_estimate.array());
  return out;
}

}  // namespace rds
