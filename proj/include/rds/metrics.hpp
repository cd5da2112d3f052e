#pragma once

#include "rds/tensor.hpp"

#include <cstdint>

namespace rds {

/// Measurement degradation: each entry is independently replaced by the
/// outlier value xi with probability rho; the remaining entries receive
/// additive Gaussian noise of level sigma. Replaced entries carry no
/// Gaussian noise.
struct CorruptionSpec {
  double sigma = 0.05;
  double rho = 0.0;
  double xi = -1.0;
  std::uint64_t seed = 0;
};

struct Corrupted {
  Tensor y;
  Tensor corrupted_mask;  // 1 where replaced; for evaluation only, never shown to solvers
};

Corrupted corrupt_measurement(const Tensor& y_clean, const CorruptionSpec& spec);

double mse(const Tensor& x, const Tensor& ref);

/// 10 log10(peak^2 / mse); identical inputs return the 200 dB cap.
double psnr(const Tensor& x, const Tensor& ref, double peak);

/// Mean local structural similarity over all 11x11 windows (Gaussian
/// window, std 1.5), stabilized with C1 = (0.01 peak)^2, C2 = (0.03 peak)^2.
/// Inputs must be 2-D with both dimensions >= 11.
double ssim(const Tensor& x, const Tensor& ref, double peak = 1.0);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
};

/// Metrics for signals living in [-1, 1]: both inputs are rescaled to
/// [0, 1] and compared with peak 1 for comparability with standard tables.
MetricReport compute_metrics(const Tensor& x, const Tensor& ref);

}  // namespace rds
