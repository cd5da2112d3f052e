#include "rds/metrics.hpp"
#include "rds/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace rds;

TEST_CASE("corruption: no degradation is the identity") {
  RngStream rng(2);
  const Tensor y = rng.gaussian({50});
  const Corrupted out = corrupt_measurement(y, {0.0, 0.0, -1.0, 9});
  CHECK(out.corrupted_mask.array().sum() == 0.0);
  for (Index i = 0; i < y.size(); ++i) CHECK(out.y[i] == y[i]);
}

TEST_CASE("corruption: replaced entries carry the outlier value exactly") {
  RngStream rng(4);
  const Tensor y = rng.gaussian({20000});
  const Corrupted out = corrupt_measurement(y, {0.05, 0.1, -1.0, 13});
  Index corrupted = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (out.corrupted_mask[i] == 1.0) {
      CHECK(out.y[i] == -1.0);
      ++corrupted;
    } else {
      CHECK(out.y[i] != y[i]);  // sigma > 0: noise moved every kept entry
    }
  }
  const double frac = static_cast<double>(corrupted) / y.size();
  CHECK(std::abs(frac - 0.1) < 3.0 * std::sqrt(0.1 * 0.9 / y.size()));
}

TEST_CASE("corruption: near-total replacement") {
  const Tensor y = Tensor::constant({10000}, 0.5);
  const Corrupted out = corrupt_measurement(y, {0.0, 0.999, -1.0, 17});
  Index hits = 0;
  for (Index i = 0; i < y.size(); ++i)
    if (out.y[i] == -1.0) ++hits;
  CHECK(hits >= 9900);
}

TEST_CASE("corruption: invalid fraction rejected") {
  CHECK_THROWS_AS(corrupt_measurement(Tensor({4}), {0.0, 1.0, -1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(corrupt_measurement(Tensor({4}), {-0.1, 0.5, -1.0, 0}), std::invalid_argument);
}

TEST_CASE("psnr: cap, zero, and hand value") {
  const Tensor a = Tensor::constant({16}, 0.25);
  CHECK(psnr(a, a, 1.0) == 200.0);

  const Tensor zero({16});
  const Tensor one = Tensor::constant({16}, 1.0);
  CHECK(psnr(one, zero, 1.0) == doctest::Approx(0.0));

  const Tensor half = Tensor::constant({16}, 0.5);
  CHECK(psnr(half, zero, 1.0) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("psnr: shift invariant") {
  RngStream rng(6);
  const Tensor x = rng.gaussian({40});
  const Tensor ref = rng.gaussian({40});
  const double base = psnr(x, ref, 1.0);
  const Tensor xs = x.with_values(x.array() + 0.37);
  const Tensor rs = ref.with_values(ref.array() + 0.37);
  CHECK(psnr(xs, rs, 1.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ssim: perfect match is exactly one") {
  RngStream rng(8);
  const Tensor img = rng.gaussian({16, 16});
  CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim: anti-correlated zero-mean images score negative") {
  // Checkerboard: locally zero-mean, so the sign comes from the structure
  // term where the covariance of x and -x is strictly negative.
  Tensor img({32, 32});
  for (Index i = 0; i < 32; ++i)
    for (Index j = 0; j < 32; ++j) img(i, j) = ((i + j) % 2 == 0) ? 0.3 : -0.3;
  const Tensor flipped = img.with_values(-img.array());
  CHECK(ssim(img, flipped) < 0.0);
}

TEST_CASE("ssim: noisy copy lands in the expected band") {
  RngStream rng(12);
  Tensor ref({64, 64});
  for (Index i = 0; i < ref.size(); ++i) ref[i] = 0.5 + 0.2 * rng.next_gaussian();
  Tensor noisy = ref;
  for (Index i = 0; i < noisy.size(); ++i) noisy[i] += 0.1 * rng.next_gaussian();
  const double s = ssim(noisy, ref);
  CHECK(s > 0.3);
  CHECK(s < 0.99);
}

TEST_CASE("ssim: symmetric") {
  RngStream rng(14);
  const Tensor a = rng.gaussian({20, 20});
  const Tensor b = rng.gaussian({20, 20});
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
}

TEST_CASE("ssim: undersized inputs rejected") {
  CHECK_THROWS_AS(ssim(Tensor({8, 8}), Tensor({8, 8})), std::invalid_argument);
  CHECK_THROWS_AS(ssim(Tensor({16}), Tensor({16})), std::invalid_argument);
}

TEST_CASE("metric report: [-1,1] convention") {
  RngStream rng(16);
  const Tensor img = rng.gaussian({16, 16});
  const MetricReport same = compute_metrics(img, img);
  CHECK(same.psnr == 200.0);
  CHECK(same.ssim == 1.0);
  CHECK(same.mse == 0.0);

  // A constant offset of 0.5 in [-1,1] units is 0.25 in [0,1] units.
  const Tensor shifted = img.with_values(img.array() + 0.5);
  const MetricReport off = compute_metrics(shifted, img);
  CHECK(off.mse == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(off.psnr == doctest::Approx(10.0 * std::log10(1.0 / 0.0625)).epsilon(1e-12));
}
