#include "rds/inner_solver.hpp"

#include "rds/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace rds {
namespace {

constexpr double kConvergedGradSq = 1e-24;

WeightVector current_weights(const Tensor& x, const Tensor& ybar, const ForwardOperator& op,
                             double delta) {
  const Tensor ax = op_apply(op, x);
  return irls_weights(ybar.array() - ax.array(), delta);
}

}  // namespace

Tensor robust_gd_inner(const Tensor& x0hat, const Tensor& ybar, const ForwardOperator& op,
                       const RobustObjectiveParams& p, const GdConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("robust_gd_inner: iterations must be >= 1");
  if (!(cfg.eta_x >= 0)) throw std::invalid_argument("robust_gd_inner: eta_x must be >= 0");

  Tensor x = x0hat;
  for (int j = 0; j < cfg.iterations; ++j) {
    const WeightVector w = current_weights(x, ybar, op, p.huber.delta);
    const LossGrad lg = robust_objective_and_gradient(x, x0hat, ybar, op, p, w);
    x.array() -= cfg.eta_x * lg.grad.array();
    if (!x.all_finite())
      throw numerical_error("robust_gd_inner: iterate is not finite", j);
  }
  return x;
}

double cg_step_size(const CgState& state, const ForwardOperator& op, const WeightVector& weights,
                    const RobustObjectiveParams& p, const CgConfig& cfg) {
  const double dd = squared_norm(state.d);
  if (dd == 0.0) throw degenerate_direction_error("cg_step_size: zero direction");

  Array omega;
  if (op.linear()) {
    omega = weights * op_apply(op, state.d).array();
  } else {
    omega = weights * jvp_finite_difference(op, state.x, state.d, cfg.eta).array();
  }

  const double denom = dd / (p.r_t * p.r_t) + omega.square().sum() / (p.gamma_t * p.gamma_t);
  if (!(denom > 0) || !std::isfinite(denom))
    throw degenerate_direction_error("cg_step_size: degenerate curvature denominator");

  const double num = cfg.numerator == CgNumerator::gTg ? squared_norm(state.g)
                                                       : dot(state.g, state.d);
  return num / denom;
}

double fletcher_reeves_beta(const Tensor& g_next, const Tensor& g) {
  const double gg = squared_norm(g);
  if (!(gg > 0)) throw std::invalid_argument("fletcher_reeves_beta: g has zero norm");
  return squared_norm(g_next) / gg;
}

Tensor robust_cg_inner(const Tensor& x0hat, const Tensor& ybar, const ForwardOperator& op,
                       const RobustObjectiveParams& p, const CgConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("robust_cg_inner: iterations must be >= 1");
  if (!(cfg.eta > 0)) throw std::invalid_argument("robust_cg_inner: eta must be positive");

  CgState s;
  s.x = x0hat;
  WeightVector w = current_weights(s.x, ybar, op, p.huber.delta);
  LossGrad lg = robust_objective_and_gradient(s.x, x0hat, ybar, op, p, w);
  s.g = lg.grad.with_values(-lg.grad.array());
  s.d = s.g;

  double gg = squared_norm(s.g);
  for (int j = 0; j < cfg.iterations; ++j) {
    if (gg <= kConvergedGradSq) return s.x;

    const double alpha = cg_step_size(s, op, w, p, cfg);
    s.x.array() += alpha * s.d.array();
    if (!s.x.all_finite())
      throw numerical_error("robust_cg_inner: iterate is not finite", j);

    w = current_weights(s.x, ybar, op, p.huber.delta);
    lg = robust_objective_and_gradient(s.x, x0hat, ybar, op, p, w);
    Tensor g_next = lg.grad.with_values(-lg.grad.array());

    const double gg_next = squared_norm(g_next);
    if (gg_next <= kConvergedGradSq) return s.x;

    const double beta = gg_next / gg;
    s.d = g_next.with_values(g_next.array() + beta * s.d.array());
    s.g = std::move(g_next);
    gg = gg_next;
  }
  return s.x;
}

}  // namespace rds
