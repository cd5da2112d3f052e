#include "rds/operators.hpp"
#include "rds/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace rds;

namespace {

// Every linear operator kind over a small image, for property sweeps.
std::vector<ForwardOperator> linear_zoo(std::uint64_t seed) {
  std::vector<ForwardOperator> ops;
  ops.push_back(ForwardOperator::inpaint(random_keep_mask({8, 8}, 0.5, seed)));
  ops.push_back(ForwardOperator::downsample({8, 8}, 2));
  ops.push_back(ForwardOperator::conv2d({8, 8}, gaussian_kernel(3, 0.8), Boundary::replicate));
  ops.push_back(ForwardOperator::conv2d({8, 8}, gaussian_kernel(5, 1.2), Boundary::zero));
  return ops;
}

}  // namespace

TEST_CASE("inpaint: all-true mask is the identity") {
  const ForwardOperator op = ForwardOperator::inpaint(Tensor::constant({4, 4}, 1.0));
  RngStream rng(3);
  const Tensor x = rng.gaussian({4, 4});
  const Tensor y = op_apply(op, x);
  for (Index i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("inpaint: vjp embeds at kept positions") {
  Tensor mask({4});
  mask[0] = 1.0;
  mask[2] = 1.0;
  const ForwardOperator op = ForwardOperator::inpaint(mask);
  const Tensor w = Tensor::vector({5.0, 6.0, 7.0, 8.0});
  const Tensor back = op_vjp(op, Tensor({4}), w);
  CHECK(back[0] == 5.0);
  CHECK(back[1] == 0.0);
  CHECK(back[2] == 7.0);
  CHECK(back[3] == 0.0);
}

TEST_CASE("downsample: 1-d average pooling") {
  const ForwardOperator op = ForwardOperator::downsample({4}, 2);
  const Tensor y = op_apply(op, Tensor::vector({1.0, 3.0, 5.0, 7.0}));
  REQUIRE(y.size() == 2);
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(6.0));
}

TEST_CASE("downsample: 2-d block average and shape") {
  const ForwardOperator op = ForwardOperator::downsample({4, 4}, 2);
  Tensor x({4, 4});
  for (Index i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
  const Tensor y = op_apply(op, x);
  REQUIRE(y.shape() == Shape{2, 2});
  CHECK(y(0, 0) == doctest::Approx((0.0 + 1 + 4 + 5) / 4));
  CHECK(y(1, 1) == doctest::Approx((10.0 + 11 + 14 + 15) / 4));
  CHECK_THROWS_AS(ForwardOperator::downsample({5, 5}, 2), std::invalid_argument);
}

TEST_CASE("conv2d: delta kernel is the identity") {
  Tensor kernel({3, 3});
  kernel(1, 1) = 1.0;
  const ForwardOperator op = ForwardOperator::conv2d({6, 6}, kernel);
  RngStream rng(5);
  const Tensor x = rng.gaussian({6, 6});
  const Tensor y = op_apply(op, x);
  for (Index i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("linear kinds: adjoint identity <Ax, w> = <x, A^T w>") {
  RngStream rng(9);
  for (const ForwardOperator& op : linear_zoo(21)) {
    for (int trial = 0; trial < 5; ++trial) {
      const Tensor x = rng.gaussian(op.input_shape());
      const Tensor w = rng.gaussian(op.output_shape());
      const double lhs = dot(op_apply(op, x), w);
      const double rhs = dot(x, op_vjp(op, x, w));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("linear kinds: additivity and homogeneity probe") {
  RngStream rng(13);
  for (const ForwardOperator& op : linear_zoo(22)) {
    const Tensor x = rng.gaussian(op.input_shape());
    const Tensor y = rng.gaussian(op.input_shape());
    const double a = 2.0 * rng.next_uniform() - 1.0;
    const double b = 2.0 * rng.next_uniform() - 1.0;
    const Tensor combo = op_apply(op, x.with_values(a * x.array() + b * y.array()));
    const Array direct = a * op_apply(op, x).array() + b * op_apply(op, y).array();
    const double err = (combo.array() - direct).abs().maxCoeff();
    CHECK(err <= 1e-10 * (norm(x) + norm(y)));
  }
}

TEST_CASE("nonlinear satblur: vjp matches central differences") {
  const ForwardOperator op =
      ForwardOperator::nonlinear_satblur({6, 6}, gaussian_kernel(3, 1.0), 3.0);
  RngStream rng(17);
  const Tensor x = rng.gaussian({6, 6});
  const Tensor w = rng.gaussian({6, 6});
  const Tensor analytic = op_vjp(op, x, w);

  // Central differences of u -> <A(u), w> coordinate by coordinate.
  const double h = 1e-6;
  for (Index i = 0; i < x.size(); i += 7) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (dot(op_apply(op, xp), w) - dot(op_apply(op, xm), w)) / (2.0 * h);
    CHECK(std::abs(fd - analytic[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("fd jvp: exact on linear kinds for both eta values") {
  RngStream rng(23);
  for (const ForwardOperator& op : linear_zoo(23)) {
    const Tensor x = rng.gaussian(op.input_shape());
    const Tensor d = rng.gaussian(op.input_shape());
    const Tensor exact = op_apply(op, d);
    for (double eta : {1e-3, 1e-4}) {
      const Tensor fd = jvp_finite_difference(op, x, d, eta);
      const double rel = norm(fd - exact) / std::max(1e-300, norm(exact));
      CHECK(rel <= 1e-10);
    }
  }
}

TEST_CASE("fd jvp: zero direction gives zero") {
  const ForwardOperator op = ForwardOperator::conv2d({5, 5}, gaussian_kernel(3, 1.0));
  RngStream rng(29);
  const Tensor x = rng.gaussian({5, 5});
  const Tensor z = jvp_finite_difference(op, x, Tensor({5, 5}), 1e-3);
  CHECK(norm(z) == 0.0);
  CHECK_THROWS_AS(jvp_finite_difference(op, x, Tensor({5, 5}), 0.0), std::invalid_argument);
}

TEST_CASE("fd jvp: nonlinear error shrinks linearly in eta") {
  const Tensor kernel = gaussian_kernel(3, 1.0);
  const ForwardOperator op = ForwardOperator::nonlinear_satblur({6, 6}, kernel, 3.0);
  const ForwardOperator blur = ForwardOperator::conv2d({6, 6}, kernel);
  RngStream rng(31);
  const Tensor x = rng.gaussian({6, 6});
  const Tensor d = rng.gaussian({6, 6});

  // Analytic directional derivative: sech^2(g Kx) .* (K d).
  const Array pre = op_apply(blur, x).array();
  const Array th = (3.0 * pre).tanh();
  const Tensor exact = d.with_values((1.0 - th.square()) * op_apply(blur, d).array());

  const double err_coarse = norm(jvp_finite_difference(op, x, d, 1e-2) - exact);
  const double err_fine = norm(jvp_finite_difference(op, x, d, 1e-4) - exact);
  CHECK(err_fine * 20.0 < err_coarse);  // first-order: ~100x over two decades
}

TEST_CASE("gaussian kernel: normalization and delta limit") {
  const Tensor k = gaussian_kernel(5, 1.0);
  CHECK(k.array().sum() == doctest::Approx(1.0).epsilon(1e-12));

  // Brute-force oracle: evaluate exp(-r^2/2) on the grid and normalize.
  double total = 0.0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) total += std::exp(-(i * i + j * j) / 2.0);
  CHECK(k(2, 2) == doctest::Approx(1.0 / total).epsilon(1e-12));
  CHECK(k(2, 2) == doctest::Approx(0.1621).epsilon(1e-3));

  const Tensor dirac = gaussian_kernel(3, 1e-6);
  CHECK(dirac(1, 1) == doctest::Approx(1.0));
  CHECK(dirac(0, 0) == 0.0);
}

TEST_CASE("motion kernel: normalized horizontal line") {
  const Tensor k = motion_kernel(9, 9, 0.5);
  CHECK(k.array().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k(4, 0) > 0.0);                  // the line spans the full row
  CHECK(k(4, 4) > k(3, 4));              // cross profile decays off the line
  CHECK(k(0, 4) < 1e-8);                 // far rows negligible
}

TEST_CASE("random mask: keep count inside the binomial band") {
  const Tensor mask = random_keep_mask({1000}, 0.7, 12345);
  const double kept = mask.array().sum();
  CHECK(kept >= 230.0);
  CHECK(kept <= 370.0);
  for (Index i = 0; i < mask.size(); ++i) CHECK((mask[i] == 0.0 || mask[i] == 1.0));
}

TEST_CASE("builders: invalid arguments") {
  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(random_keep_mask({10}, 1.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_keep_mask({10}, 1.0, 0), std::invalid_argument);
  OperatorSpec spec;
  spec.task = OperatorSpec::Task::gaussian_deblur;
  spec.kernel_size = 4;
  CHECK_THROWS_AS(build_operator(spec, {8, 8}), std::invalid_argument);
}

TEST_CASE("satblur: output bounded by saturated blur magnitude") {
  const Tensor kernel = gaussian_kernel(3, 1.0);
  const double gain = 3.0;
  const ForwardOperator op = ForwardOperator::nonlinear_satblur({6, 6}, kernel, gain);
  const ForwardOperator blur = ForwardOperator::conv2d({6, 6}, kernel);
  RngStream rng(37);
  const Tensor x = rng.gaussian({6, 6});
  const double pre_max = op_apply(blur, x).array().abs().maxCoeff();
  const double bound = std::tanh(gain * pre_max) / gain;
  const Tensor y = op_apply(op, x);
  for (Index i = 0; i < y.size(); ++i) CHECK(std::abs(y[i]) <= bound + 1e-15);
}

TEST_CASE("operators: shape mismatches rejected") {
  const ForwardOperator op = ForwardOperator::downsample({8}, 2);
  CHECK_THROWS_AS(op_apply(op, Tensor({7})), std::invalid_argument);
  CHECK_THROWS_AS(op_vjp(op, Tensor({8}), Tensor({3})), std::invalid_argument);
}
