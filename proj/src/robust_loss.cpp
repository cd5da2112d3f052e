#include "rds/robust_loss.hpp"

#include <cmath>
#include <stdexcept>

namespace rds {
namespace {

void check_delta(double delta) {
  if (std::isnan(delta) || delta <= 0)
    throw std::invalid_argument("huber threshold must be positive");
}

}  // namespace

double huber_loss(const Eigen::Ref<const Array>& residual, double delta) {
  check_delta(delta);
  if (std::isinf(delta)) return residual.square().sum();
  double total = 0.0;
  for (Index i = 0; i < residual.size(); ++i) {
    const double a = std::abs(residual[i]);
    total += a <= delta ? a * a : 2.0 * delta * a - delta * delta;
  }
  return total;
}

WeightVector irls_weights(const Eigen::Ref<const Array>& residual, double delta) {
  check_delta(delta);
  WeightVector w = WeightVector::Ones(residual.size());
  if (std::isinf(delta)) return w;
  for (Index i = 0; i < residual.size(); ++i) {
    const double a = std::abs(residual[i]);
    // a > delta > 0 here, so the quotient is safe and lands in (0, 1).
    if (a > delta) w[i] = std::sqrt(delta / a);
  }
  return w;
}

LossGrad robust_objective_and_gradient(const Tensor& x, const Tensor& x0hat, const Tensor& ybar,
                                       const ForwardOperator& op, const RobustObjectiveParams& p,
                                       const WeightVector& weights) {
  require_same_shape(x, x0hat, "robust_objective_and_gradient");
  if (weights.size() != ybar.size())
    throw std::invalid_argument("robust_objective_and_gradient: weight length mismatch");
  if (!(p.r_t > 0) || !(p.gamma_t > 0))
    throw std::invalid_argument("robust_objective_and_gradient: r_t and gamma_t must be positive");

  const double inv_r2 = 1.0 / (p.r_t * p.r_t);
  const double inv_g2 = 1.0 / (p.gamma_t * p.gamma_t);

  const Tensor ax = op_apply(op, x);
  require_same_shape(ax, ybar, "robust_objective_and_gradient");
  const Array residual = ybar.array() - ax.array();
  const Array prior_diff = x.array() - x0hat.array();

  LossGrad out;
  out.loss = 0.5 * (inv_r2 * prior_diff.square().sum() +
                    inv_g2 * (weights * residual).square().sum());

  const Tensor pullback = op_vjp(op, x, ax.with_values(weights.square() * residual));
  out.grad = x.with_values(inv_r2 * prior_diff - inv_g2 * pullback.array());
  return out;
}

double robust_objective(const Tensor& x, const Tensor& x0hat, const Tensor& ybar,
                        const ForwardOperator& op, const RobustObjectiveParams& p) {
  const Tensor ax = op_apply(op, x);
  const Array residual = ybar.array() - ax.array();
  const double prior = (x.array() - x0hat.array()).square().sum();
  return 0.5 * (prior / (p.r_t * p.r_t) +
                huber_loss(residual, p.huber.delta) / (p.gamma_t * p.gamma_t));
}

}  // namespace rds
