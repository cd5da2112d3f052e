#include "rds/operators.hpp"

#include "rds/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rds {
namespace {

void check_kernel(const Tensor& kernel) {
  if (kernel.rank() != 2) throw std::invalid_argument("kernel must be 2-D");
  if (kernel.dim(0) % 2 == 0 || kernel.dim(1) % 2 == 0)
    throw std::invalid_argument("kernel dimensions must be odd");
}

void check_image(const Shape& shape) {
  if (shape.size() != 2) throw std::invalid_argument("operator expects a 2-D input shape");
}

inline Index clamp_index(Index i, Index n) { return std::clamp<Index>(i, 0, n - 1); }

// Correlation with the kernel; the boundary mode decides how source
// indices outside the image contribute.
void conv2d_apply(const Tensor& x, const Tensor& kernel, Boundary boundary, Tensor& out) {
  const Index rows = x.dim(0), cols = x.dim(1);
  const Index kr = kernel.dim(0), kc = kernel.dim(1);
  const Index cr = kr / 2, cc = kc / 2;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (Index u = 0; u < kr; ++u) {
        for (Index v = 0; v < kc; ++v) {
          const Index si = i + u - cr;
          const Index sj = j + v - cc;
          if (boundary == Boundary::replicate) {
            acc += kernel(u, v) * x(clamp_index(si, rows), clamp_index(sj, cols));
          } else if (si >= 0 && si < rows && sj >= 0 && sj < cols) {
            acc += kernel(u, v) * x(si, sj);
          }
        }
      }
      out(i, j) = acc;
    }
  }
}

// Exact adjoint of conv2d_apply: the same index walk, scattering instead
// of gathering, so clamped border reads become border accumulations.
void conv2d_adjoint(const Tensor& w, const Tensor& kernel, Boundary boundary, Tensor& out) {
  const Index rows = w.dim(0), cols = w.dim(1);
  const Index kr = kernel.dim(0), kc = kernel.dim(1);
  const Index cr = kr / 2, cc = kc / 2;
  out.array().setZero();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double wij = w(i, j);
      for (Index u = 0; u < kr; ++u) {
        for (Index v = 0; v < kc; ++v) {
          const Index si = i + u - cr;
          const Index sj = j + v - cc;
          if (boundary == Boundary::replicate) {
            out(clamp_index(si, rows), clamp_index(sj, cols)) += kernel(u, v) * wij;
          } else if (si >= 0 && si < rows && sj >= 0 && sj < cols) {
            out(si, sj) += kernel(u, v) * wij;
          }
        }
      }
    }
  }
}

Shape pooled_shape(const Shape& in, int factor) {
  Shape out = in;
  for (auto& d : out) {
    if (d % factor != 0)
      throw std::invalid_argument("downsample: dimension " + std::to_string(d) +
                                  " not divisible by factor " + std::to_string(factor));
    d /= factor;
  }
  return out;
}

}  // namespace

ForwardOperator ForwardOperator::inpaint(Tensor mask) {
  for (Index i = 0; i < mask.size(); ++i)
    if (mask[i] != 0.0 && mask[i] != 1.0)
      throw std::invalid_argument("inpaint: mask entries must be 0 or 1");
  ForwardOperator op;
  op.input_shape_ = mask.shape();
  op.output_shape_ = mask.shape();
  op.kind_ = Inpaint{std::move(mask)};
  return op;
}

ForwardOperator ForwardOperator::downsample(Shape input_shape, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
  if (input_shape.empty() || input_shape.size() > 2)
    throw std::invalid_argument("downsample: input must be 1-D or 2-D");
  ForwardOperator op;
  op.output_shape_ = pooled_shape(input_shape, factor);
  op.input_shape_ = std::move(input_shape);
  op.kind_ = Downsample{factor};
  return op;
}

ForwardOperator ForwardOperator::conv2d(Shape input_shape, Tensor kernel, Boundary boundary) {
  check_image(input_shape);
  check_kernel(kernel);
  ForwardOperator op;
  op.input_shape_ = input_shape;
  op.output_shape_ = std::move(input_shape);
  op.kind_ = Conv2d{std::move(kernel), boundary};
  return op;
}

ForwardOperator ForwardOperator::nonlinear_satblur(Shape input_shape, Tensor kernel, double gain,
                                                   Boundary boundary) {
  check_image(input_shape);
  check_kernel(kernel);
  if (!(gain > 0)) throw std::invalid_argument("nonlinear_satblur: gain must be positive");
  ForwardOperator op;
  op.input_shape_ = input_shape;
  op.output_shape_ = std::move(input_shape);
  op.kind_ = SatBlur{std::move(kernel), boundary, gain};
  return op;
}

bool ForwardOperator::linear() const { return !std::holds_alternative<SatBlur>(kind_); }

Tensor ForwardOperator::apply(const Tensor& x) const {
  require_shape(x, input_shape_, "op_apply");
  require_finite(x, "op_apply input");

  if (const auto* k = std::get_if<Inpaint>(&kind_)) {
    return x.with_values(x.array() * k->mask.array());
  }
  if (const auto* k = std::get_if<Downsample>(&kind_)) {
    const int f = k->factor;
    Tensor out(output_shape_);
    if (input_shape_.size() == 1) {
      for (Index b = 0; b < out.size(); ++b) {
        double acc = 0.0;
        for (Index r = 0; r < f; ++r) acc += x[b * f + r];
        out[b] = acc / f;
      }
    } else {
      const Index oc = output_shape_[1];
      for (Index bi = 0; bi < output_shape_[0]; ++bi) {
        for (Index bj = 0; bj < oc; ++bj) {
          double acc = 0.0;
          for (Index u = 0; u < f; ++u)
            for (Index v = 0; v < f; ++v) acc += x(bi * f + u, bj * f + v);
          out(bi, bj) = acc / (static_cast<double>(f) * f);
        }
      }
    }
    return out;
  }
  if (const auto* k = std::get_if<Conv2d>(&kind_)) {
    Tensor out(output_shape_);
    conv2d_apply(x, k->kernel, k->boundary, out);
    return out;
  }
  const auto& k = std::get<SatBlur>(kind_);
  Tensor out(output_shape_);
  conv2d_apply(x, k.kernel, k.boundary, out);
  out.array() = (k.gain * out.array()).tanh() / k.gain;
  return out;
}

Tensor ForwardOperator::vjp(const Tensor& x, const Tensor& w) const {
  require_shape(w, output_shape_, "op_vjp");
  require_finite(w, "op_vjp cotangent");

  if (const auto* k = std::get_if<Inpaint>(&kind_)) {
    return w.with_values(w.array() * k->mask.array());
  }
  if (const auto* k = std::get_if<Downsample>(&kind_)) {
    const int f = k->factor;
    Tensor out(input_shape_);
    if (input_shape_.size() == 1) {
      for (Index i = 0; i < out.size(); ++i) out[i] = w[i / f] / f;
    } else {
      const double scale = static_cast<double>(f) * f;
      for (Index i = 0; i < input_shape_[0]; ++i)
        for (Index j = 0; j < input_shape_[1]; ++j) out(i, j) = w(i / f, j / f) / scale;
    }
    return out;
  }
  if (const auto* k = std::get_if<Conv2d>(&kind_)) {
    Tensor out(input_shape_);
    conv2d_adjoint(w, k->kernel, k->boundary, out);
    return out;
  }
  // Chain rule through the saturation: d/du tanh(g u)/g = sech^2(g u).
  const auto& k = std::get<SatBlur>(kind_);
  require_shape(x, input_shape_, "op_vjp");
  Tensor pre(output_shape_);
  conv2d_apply(x, k.kernel, k.boundary, pre);
  const Array th = (k.gain * pre.array()).tanh();
  Tensor scaled = w.with_values(w.array() * (1.0 - th.square()));
  Tensor out(input_shape_);
  conv2d_adjoint(scaled, k.kernel, k.boundary, out);
  return out;
}

Tensor op_apply(const ForwardOperator& op, const Tensor& x) { return op.apply(x); }

Tensor op_vjp(const ForwardOperator& op, const Tensor& x, const Tensor& w) {
  return op.vjp(x, w);
}

Tensor jvp_finite_difference(const ForwardOperator& op, const Tensor& x, const Tensor& d,
                             double eta) {
  if (!(eta > 0)) throw std::invalid_argument("jvp_finite_difference: eta must be positive");
  require_shape(d, op.input_shape(), "jvp_finite_difference");
  const Tensor base = op.apply(x);
  const Tensor shifted = op.apply(x.with_values(x.array() + eta * d.array()));
  return base.with_values((shifted.array() - base.array()) / eta);
}

Tensor gaussian_kernel(int size, double stddev) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian_kernel: size must be odd");
  if (!(stddev > 0)) throw std::invalid_argument("gaussian_kernel: stddev must be positive");
  Tensor k({size, size});
  const int c = size / 2;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double r2 = static_cast<double>((i - c) * (i - c) + (j - c) * (j - c));
      k(i, j) = std::exp(-r2 / (2.0 * stddev * stddev));
    }
  }
  k.array() /= k.array().sum();
  return k;
}

Tensor motion_kernel(int size, int length, double cross_std) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("motion_kernel: size must be odd");
  if (length < 1 || length > size)
    throw std::invalid_argument("motion_kernel: length must be in [1, size]");
  if (!(cross_std > 0)) throw std::invalid_argument("motion_kernel: cross_std must be positive");
  Tensor k({size, size});
  const int c = size / 2;
  const int half = length / 2;
  for (int i = 0; i < size; ++i) {
    const double dv = static_cast<double>(i - c);
    const double profile = std::exp(-dv * dv / (2.0 * cross_std * cross_std));
    for (int j = 0; j < size; ++j) {
      if (std::abs(j - c) <= half) k(i, j) = profile;
    }
  }
  k.array() /= k.array().sum();
  return k;
}

Tensor random_keep_mask(const Shape& shape, double drop_ratio, std::uint64_t seed) {
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0))
    throw std::invalid_argument("random_keep_mask: drop ratio must lie in [0, 1)");
  RngStream rng = RngStream::derived(seed, 0x6d61736bull);  // mask stream
  Tensor mask(shape);
  for (Index i = 0; i < mask.size(); ++i) mask[i] = rng.next_uniform() < drop_ratio ? 0.0 : 1.0;
  return mask;
}

ForwardOperator build_operator(const OperatorSpec& spec, const Shape& input_shape) {
  using Task = OperatorSpec::Task;
  switch (spec.task) {
    case Task::inpainting:
      return ForwardOperator::inpaint(random_keep_mask(input_shape, spec.mask_ratio, spec.mask_seed));
    case Task::super_resolution:
      return ForwardOperator::downsample(input_shape, spec.factor);
    case Task::gaussian_deblur:
      return ForwardOperator::conv2d(input_shape, gaussian_kernel(spec.kernel_size, spec.kernel_std),
                                     spec.boundary);
    case Task::motion_deblur:
      return ForwardOperator::conv2d(
          input_shape, motion_kernel(spec.kernel_size, spec.motion_length, spec.motion_cross_std),
          spec.boundary);
    case Task::nonlinear_deblur:
      return ForwardOperator::nonlinear_satblur(
          input_shape, gaussian_kernel(spec.kernel_size, spec.kernel_std), spec.gain, spec.boundary);
  }
  throw std::invalid_argument("build_operator: unknown task");
}

}  // namespace rds
