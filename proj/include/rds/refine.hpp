#pragma once

#include "rds/schedule.hpp"
#include "rds/tensor.hpp"

namespace rds {

struct RefineParams {
  double sigma = 0.0;    // measurement noise level, >= 0
  double gamma_t = 1.0;  // fidelity scale, > 0
};

/// Fidelity scale 1 / sigma_t. Grows as t -> 0; undefined at t = 0 where
/// sigma_0 = 0 (the sampler never asks there).
double gamma_schedule(double t, const NoiseSchedule& schedule);

struct Refined {
  Tensor noise_estimate;  // explicit additive-noise estimate
  Tensor ybar;            // refined measurement, y minus the estimate
};

/// Splits the observed residual between noise and signal misfit:
///   noise  = sigma^2 / (gamma_t^2 + sigma^2) * (y - A(x0hat))
///   ybar   = (gamma_t^2 y + sigma^2 A(x0hat)) / (gamma_t^2 + sigma^2)
/// so ybar = y - noise and lies componentwise between y and A(x0hat).
Refined refine_measurement(const Tensor& y, const Tensor& ax0hat, const RefineParams& p);

}  // namespace rds
