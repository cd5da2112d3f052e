#pragma once

#include "rds/tensor.hpp"

#include <cstdint>
#include <variant>

namespace rds {

enum class Boundary { replicate, zero };

/// Degradation map A from signal space to measurement space with exact
/// adjoint (vector-Jacobian product) support. Linear kinds additionally
/// satisfy additivity/homogeneity, which tests probe directly.
class ForwardOperator {
 public:
  /// Diagonal keep/drop mask; output has the input shape with dropped
  /// entries zeroed. Mask entries must be exactly 0 or 1.
  static ForwardOperator inpaint(Tensor mask);

  /// Block-average pooling by `factor` along every axis (1-D or 2-D).
  /// Each input dimension must be divisible by the factor.
  static ForwardOperator downsample(Shape input_shape, int factor);

  /// 2-D correlation with an odd-sized kernel, same-size output.
  static ForwardOperator conv2d(Shape input_shape, Tensor kernel,
                                Boundary boundary = Boundary::replicate);

  /// Blur followed by the elementwise saturation u -> tanh(gain u)/gain.
  static ForwardOperator nonlinear_satblur(Shape input_shape, Tensor kernel, double gain,
                                           Boundary boundary = Boundary::replicate);

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  bool linear() const;

  Tensor apply(const Tensor& x) const;
  Tensor vjp(const Tensor& x, const Tensor& w) const;

 private:
  struct Inpaint {
    Tensor mask;
  };
  struct Downsample {
    int factor;
  };
  struct Conv2d {
    Tensor kernel;
    Boundary boundary;
  };
  struct SatBlur {
    Tensor kernel;
    Boundary boundary;
    double gain;
  };

  ForwardOperator() = default;

  std::variant<Inpaint, Downsample, Conv2d, SatBlur> kind_;
  Shape input_shape_;
  Shape output_shape_;
};

Tensor op_apply(const ForwardOperator& op, const Tensor& x);
Tensor op_vjp(const ForwardOperator& op, const Tensor& x, const Tensor& w);

/// (A(x + eta d) - A(x)) / eta. Exact (up to rounding) for linear kinds
/// regardless of eta; first-order accurate in eta otherwise.
Tensor jvp_finite_difference(const ForwardOperator& op, const Tensor& x, const Tensor& d,
                             double eta);

// -------------------------------------------------------------------------
// Builders

/// Normalized isotropic Gaussian kernel, odd size. As std -> 0 the kernel
/// collapses to a discrete delta.
Tensor gaussian_kernel(int size, double stddev);

/// Horizontal line segment of the given length with a Gaussian cross
/// profile, embedded in an odd size x size kernel and normalized to sum 1.
Tensor motion_kernel(int size, int length, double cross_std);

/// Bernoulli keep mask: each entry kept with probability 1 - drop_ratio,
/// drawn from the stream seeded below.
Tensor random_keep_mask(const Shape& shape, double drop_ratio, std::uint64_t seed);

struct OperatorSpec {
  enum class Task { inpainting, super_resolution, gaussian_deblur, motion_deblur, nonlinear_deblur };

  Task task = Task::inpainting;
  double mask_ratio = 0.7;   // inpainting: fraction dropped
  std::uint64_t mask_seed = 0;
  int factor = 4;            // super-resolution pooling factor
  int kernel_size = 9;       // blur kernels (odd)
  double kernel_std = 1.5;   // gaussian blur
  int motion_length = 9;     // motion blur segment length
  double motion_cross_std = 0.5;
  double gain = 3.0;         // saturation gain for the nonlinear blur
  Boundary boundary = Boundary::replicate;
};

ForwardOperator build_operator(const OperatorSpec& spec, const Shape& input_shape);

}  // namespace rds
