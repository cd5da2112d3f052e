#include "rds/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rds {

NoiseSchedule NoiseSchedule::vp_linear(double beta_min, double beta_max, double T) {
  if (beta_min <= 0 || beta_max <= beta_min || T <= 0)
    throw std::invalid_argument("vp_linear: need 0 < beta_min < beta_max and T > 0");
  return NoiseSchedule(Kind::vp_linear, beta_min, beta_max, T);
}

NoiseSchedule NoiseSchedule::vp_cosine(double s, double T) {
  if (s <= 0 || T <= 0) throw std::invalid_argument("vp_cosine: need s > 0 and T > 0");
  return NoiseSchedule(Kind::vp_cosine, s, 0.0, T);
}

void NoiseSchedule::check_time(double t) const {
  if (!(t >= 0.0 && t <= T_))
    throw std::invalid_argument("NoiseSchedule: t = " + std::to_string(t) + " outside [0, " +
                                std::to_string(T_) + "]");
}

double NoiseSchedule::alpha(double t) const {
  check_time(t);
  if (kind_ == Kind::vp_linear) {
    // int_0^t beta = beta_min t + (beta_max - beta_min) t^2 / (2T)
    const double integral = p0_ * t + (p1_ - p0_) * t * t / (2.0 * T_);
    return std::exp(-0.5 * integral);
  }
  const double s = p0_;
  const double num = std::cos((t / T_ + s) / (1.0 + s) * std::numbers::pi / 2.0);
  const double den = std::cos(s / (1.0 + s) * std::numbers::pi / 2.0);
  return num / den;
}

double NoiseSchedule::sigma(double t) const {
  const double a = alpha(t);
  const double var = std::max(0.0, 1.0 - a * a);
  return std::sqrt(var);
}

std::pair<double, double> NoiseSchedule::eval(double t) const { return {alpha(t), sigma(t)}; }

TimeGrid build_time_grid(int steps, double T, GridSpacing spacing) {
  if (steps < 1) throw std::invalid_argument("build_time_grid: steps must be >= 1");
  if (!(T > 0)) throw std::invalid_argument("build_time_grid: T must be positive");
  if (spacing.kind == GridSpacing::Kind::polynomial && !(spacing.power > 0))
    throw std::invalid_argument("build_time_grid: polynomial power must be positive");

  TimeGrid grid;
  grid.times.resize(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double frac = static_cast<double>(i) / steps;
    const double shaped =
        spacing.kind == GridSpacing::Kind::uniform ? frac : std::pow(frac, spacing.power);
    grid.times[static_cast<std::size_t>(i)] = T * shaped;
  }
  return grid;
}

}  // namespace rds
