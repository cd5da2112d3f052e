#pragma once

#include <utility>
#include <vector>

namespace rds {

/// Variance-preserving noise schedule giving the pair (alpha_t, sigma_t)
/// of the perturbation kernel x_t | x_0 ~ N(alpha_t x_0, sigma_t^2 I).
/// Both kinds satisfy alpha_0 = 1, sigma_0 = 0, a strictly decreasing
/// signal-to-noise ratio alpha^2/sigma^2, and an approximately standard
/// normal terminal marginal (alpha_T <= 1e-3, |sigma_T - 1| <= 1e-3).
class NoiseSchedule {
 public:
  enum class Kind { vp_linear, vp_cosine };

  /// Linear beta(t) ramp from beta_min to beta_max over [0, T] with
  /// alpha_t = exp(-1/2 int_0^t beta). The default ramp reaches
  /// alpha_T ~ 8.9e-4 at T = 1.
  static NoiseSchedule vp_linear(double beta_min = 0.1, double beta_max = 28.0, double T = 1.0);

  /// Squared-cosine ramp with offset s; alpha_T is exactly cos(pi/2) ~ 0.
  static NoiseSchedule vp_cosine(double s = 0.008, double T = 1.0);

  Kind kind() const { return kind_; }
  double terminal_time() const { return T_; }

  double alpha(double t) const;
  double sigma(double t) const;

  /// (alpha_t, sigma_t); throws std::invalid_argument outside [0, T].
  std::pair<double, double> eval(double t) const;

 private:
  NoiseSchedule(Kind kind, double a, double b, double T) : kind_(kind), p0_(a), p1_(b), T_(T) {}

  void check_time(double t) const;

  Kind kind_;
  double p0_;  // beta_min or cosine offset s
  double p1_;  // beta_max (unused for cosine)
  double T_;
};

/// Discretization 0 = t_0 < t_1 < ... < t_N = T of the sampling interval.
struct TimeGrid {
  std::vector<double> times;
  int steps() const { return static_cast<int>(times.size()) - 1; }
};

struct GridSpacing {
  enum class Kind { uniform, polynomial };
  Kind kind = Kind::polynomial;
  double power = 2.0;

  static GridSpacing uniform() { return {Kind::uniform, 1.0}; }
  static GridSpacing polynomial(double p) { return {Kind::polynomial, p}; }
};

/// N+1 strictly increasing times with endpoints 0 and T. Uniform spacing
/// gives t_i = i T / N; polynomial(p) gives t_i = T (i/N)^p.
TimeGrid build_time_grid(int steps, double T, GridSpacing spacing = {});

}  // namespace rds
