#pragma once

#include "rds/operators.hpp"
#include "rds/tensor.hpp"

namespace rds {

/// Huber threshold. delta = +infinity is a valid sentinel selecting the
/// plain squared-l2 objective (every residual stays in the quadratic
/// branch and every reweighting factor is 1).
struct HuberParams {
  double delta = 0.02;

  static HuberParams squared_l2() { return {std::numeric_limits<double>::infinity()}; }
  bool is_squared_l2() const { return std::isinf(delta); }
};

/// Diagonal reweighting factors, entries in (0, 1].
using WeightVector = Array;

/// Sum over entries of the elementwise penalty
///   h(r) = r^2            for |r| <= delta,
///   h(r) = 2 delta |r| - delta^2   otherwise,
/// which is C^1 with value delta^2 and slope 2 delta at the knee.
double huber_loss(const Eigen::Ref<const Array>& residual, double delta);

/// Reweighting factors w_i = 1 for |r_i| <= delta and sqrt(delta/|r_i|)
/// beyond, so that w_i^2 r_i^2 = min(r_i^2, delta |r_i|).
WeightVector irls_weights(const Eigen::Ref<const Array>& residual, double delta);

/// Time-dependent weights of the composite objective: prior proximity
/// scale r_t and data fidelity scale gamma_t, plus the Huber threshold.
struct RobustObjectiveParams {
  double r_t = 1.0;
  double gamma_t = 1.0;
  HuberParams huber{};
};

struct LossGrad {
  double loss = 0.0;
  Tensor grad;
};

/// Value and gradient of
///   1/2 ( ||x - x0hat||^2 / r_t^2 + ||W (ybar - A(x))||^2 / gamma_t^2 )
/// with the weights held constant ("detached"). When W was computed from
/// the current residual, the gradient coincides with the gradient of the
/// composite objective using the true Huber penalty.
LossGrad robust_objective_and_gradient(const Tensor& x, const Tensor& x0hat, const Tensor& ybar,
                                       const ForwardOperator& op, const RobustObjectiveParams& p,
                                       const WeightVector& weights);

/// The composite objective with the true Huber penalty (no reweighting);
/// used for traces and for checking descent.
double robust_objective(const Tensor& x, const Tensor& x0hat, const Tensor& ybar,
                        const ForwardOperator& op, const RobustObjectiveParams& p);

}  // namespace rds
