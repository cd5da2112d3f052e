#pragma once

#include "rds/operators.hpp"
#include "rds/robust_loss.hpp"
#include "rds/tensor.hpp"

namespace rds {

struct GdConfig {
  int iterations = 100;  // J
  double eta_x = 1e-4;   // learning rate
};

enum class CgNumerator { gTg, gTd };

struct CgConfig {
  int iterations = 20;                      // J
  double eta = 1e-4;                        // step of the finite-difference JVP
  CgNumerator numerator = CgNumerator::gTg;
};

/// Conjugate-gradient iterate: current point, negative gradient, and
/// search direction.
struct CgState {
  Tensor x;
  Tensor g;
  Tensor d;
};

/// Gradient descent on the reweighted objective, initialized at x0hat.
/// The weights are recomputed from the current residual before every
/// step, and each step moves by eta_x times the detached-weight gradient.
/// Throws numerical_error (with the iteration index) if an iterate stops
/// being finite.
Tensor robust_gd_inner(const Tensor& x0hat, const Tensor& ybar, const ForwardOperator& op,
                       const RobustObjectiveParams& p, const GdConfig& cfg);

/// Step size along d. The curvature term uses W A d directly for linear
/// operators and the finite-difference Jacobian-vector product otherwise:
///   alpha = num / (d.d / r_t^2 + w.w / gamma_t^2),
/// num = g.g or g.d by config. With the g.d numerator, frozen weights and
/// a linear operator this is the exact minimizer along d.
double cg_step_size(const CgState& state, const ForwardOperator& op, const WeightVector& weights,
                    const RobustObjectiveParams& p, const CgConfig& cfg);

/// beta = g_next.g_next / g.g. The caller forms d_next = g_next + beta d.
/// g.g = 0 signals convergence and should terminate the iteration instead
/// of reaching this function.
double fletcher_reeves_beta(const Tensor& g_next, const Tensor& g);

/// Conjugate-gradient descent on the reweighted objective, initialized at
/// x0hat with d_0 = g_0 = -grad. Each iteration computes the step size,
/// moves, recomputes the weights from the new residual, re-evaluates the
/// gradient, and updates the direction with the Fletcher-Reeves factor.
/// Returns early with the current iterate once g.g <= 1e-24.
Tensor robust_cg_inner(const Tensor& x0hat, const Tensor& ybar, const ForwardOperator& op,
                       const RobustObjectiveParams& p, const CgConfig& cfg);

}  // namespace rds
