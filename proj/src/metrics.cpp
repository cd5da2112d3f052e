#include "rds/metrics.hpp"

#include "rds/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rds {
namespace {

constexpr double kPsnrCap = 200.0;
constexpr int kSsimWindow = 11;
constexpr double kSsimWindowStd = 1.5;

}  // namespace

Corrupted corrupt_measurement(const Tensor& y_clean, const CorruptionSpec& spec) {
  if (!(spec.rho >= 0.0 && spec.rho < 1.0))
    throw std::invalid_argument("corrupt_measurement: rho must lie in [0, 1)");
  if (spec.sigma < 0) throw std::invalid_argument("corrupt_measurement: sigma must be >= 0");

  RngStream rng = RngStream::derived(spec.seed, 0x636f7272ull);  // corruption stream
  Corrupted out{y_clean, Tensor(y_clean.shape())};
  for (Index i = 0; i < y_clean.size(); ++i) {
    if (rng.next_uniform() < spec.rho) {
      out.y[i] = spec.xi;
      out.corrupted_mask[i] = 1.0;
    } else {
      out.y[i] = y_clean[i] + spec.sigma * rng.next_gaussian();
    }
  }
  return out;
}

double mse(const Tensor& x, const Tensor& ref) {
  require_same_shape(x, ref, "mse");
  return (x.array() - ref.array()).square().mean();
}

double psnr(const Tensor& x, const Tensor& ref, double peak) {
  require_same_shape(x, ref, "psnr");
  if (!(peak > 0)) throw std::invalid_argument("psnr: peak must be positive");
  const double err = mse(x, ref);
  if (err == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / err));
}

double ssim(const Tensor& x, const Tensor& ref, double peak) {
  require_same_shape(x, ref, "ssim");
  if (x.rank() != 2) throw std::invalid_argument("ssim: inputs must be 2-D");
  const Index rows = x.dim(0), cols = x.dim(1);
  if (rows < kSsimWindow || cols < kSsimWindow)
    throw std::invalid_argument("ssim: inputs must be at least 11x11");

  // Normalized Gaussian window.
  double window[kSsimWindow][kSsimWindow];
  double wsum = 0.0;
  for (int u = 0; u < kSsimWindow; ++u) {
    for (int v = 0; v < kSsimWindow; ++v) {
      const double du = u - kSsimWindow / 2;
      const double dv = v - kSsimWindow / 2;
      window[u][v] = std::exp(-(du * du + dv * dv) / (2.0 * kSsimWindowStd * kSsimWindowStd));
      wsum += window[u][v];
    }
  }
  for (auto& row : window)
    for (double& w : row) w /= wsum;

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  double total = 0.0;
  Index count = 0;
  for (Index i = 0; i + kSsimWindow <= rows; ++i) {
    for (Index j = 0; j + kSsimWindow <= cols; ++j) {
      double mx = 0.0, my = 0.0;
      for (int u = 0; u < kSsimWindow; ++u)
        for (int v = 0; v < kSsimWindow; ++v) {
          mx += window[u][v] * x(i + u, j + v);
          my += window[u][v] * ref(i + u, j + v);
        }
      double vx = 0.0, vy = 0.0, cov = 0.0;
      for (int u = 0; u < kSsimWindow; ++u)
        for (int v = 0; v < kSsimWindow; ++v) {
          const double dx = x(i + u, j + v) - mx;
          const double dy = ref(i + u, j + v) - my;
          vx += window[u][v] * dx * dx;
          vy += window[u][v] * dy * dy;
          cov += window[u][v] * dx * dy;
        }
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

MetricReport compute_metrics(const Tensor& x, const Tensor& ref) {
  const Tensor x01 = x.with_values((x.array() + 1.0) * 0.5);
  const Tensor ref01 = ref.with_values((ref.array() + 1.0) * 0.5);
  MetricReport report;
  report.mse = mse(x01, ref01);
  report.psnr = psnr(x01, ref01, 1.0);
  report.ssim = x.rank() == 2 && x.dim(0) >= kSsimWindow && x.dim(1) >= kSsimWindow
                    ? ssim(x01, ref01, 1.0)
                    : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace rds
