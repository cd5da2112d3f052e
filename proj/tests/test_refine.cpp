#include "rds/refine.hpp"
#include "rds/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace rds;

TEST_CASE("gamma schedule: reciprocal of sigma, growing toward t = 0") {
  const NoiseSchedule s = NoiseSchedule::vp_linear();
  const double T = s.terminal_time();

  double prev = 0.0;
  for (int i = 1000; i >= 1; --i) {
    const double t = T * i / 1000.0;
    const double g = gamma_schedule(t, s);
    CHECK(g == doctest::Approx(1.0 / s.sigma(t)).epsilon(1e-14));
    CHECK(g > prev);
    prev = g;
  }
  CHECK_THROWS_AS(gamma_schedule(0.0, s), std::domain_error);
}

TEST_CASE("refine: noiseless measurement passes through") {
  RngStream rng(2);
  const Tensor y = rng.gaussian({6});
  const Tensor ax = rng.gaussian({6});
  const Refined r = refine_measurement(y, ax, RefineParams{0.0, 1.7});
  CHECK(norm(r.noise_estimate) == 0.0);
  for (Index i = 0; i < y.size(); ++i) CHECK(r.ybar[i] == y[i]);
}

TEST_CASE("refine: equal scales give the midpoint") {
  const Tensor y = Tensor::vector({1.0, -0.5});
  const Tensor ax = Tensor::vector({0.0, 0.5});
  const Refined r = refine_measurement(y, ax, RefineParams{0.3, 0.3});
  CHECK(r.noise_estimate[0] == doctest::Approx(0.5));
  CHECK(r.ybar[0] == doctest::Approx(0.5));
  CHECK(r.ybar[1] == doctest::Approx(0.0));
}

TEST_CASE("refine: scalar hand value") {
  const Tensor y = Tensor::vector({1.0});
  const Tensor ax = Tensor::vector({0.0});
  const Refined r = refine_measurement(y, ax, RefineParams{0.05, 1.0});
  CHECK(r.ybar[0] == doctest::Approx(1.0 / 1.0025).epsilon(1e-12));
}

TEST_CASE("refine: residual split identity and componentwise convexity") {
  RngStream rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor y = rng.gaussian({12});
    const Tensor ax = rng.gaussian({12});
    const double sigma = rng.next_uniform();
    const double gamma = 0.1 + rng.next_uniform();
    const Refined r = refine_measurement(y, ax, RefineParams{sigma, gamma});

    for (Index i = 0; i < y.size(); ++i) {
      CHECK(std::abs(r.ybar[i] - (y[i] - r.noise_estimate[i])) <= 1e-12);
      const double lo = std::min(y[i], ax[i]) - 1e-12;
      const double hi = std::max(y[i], ax[i]) + 1e-12;
      CHECK(r.ybar[i] >= lo);
      CHECK(r.ybar[i] <= hi);
    }
  }
}

TEST_CASE("refine: noise estimate solves the scalar subproblem (grid oracle)") {
  RngStream rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const double y = 2.0 * rng.next_gaussian();
    const double ax = 2.0 * rng.next_gaussian();
    const double sigma = 0.05 + rng.next_uniform();
    const double gamma = 0.05 + rng.next_uniform();

    const Refined r = refine_measurement(Tensor::vector({y}), Tensor::vector({ax}),
                                         RefineParams{sigma, gamma});
    const double nu_hat = r.noise_estimate[0];

    auto objective = [&](double nu) {
      const double misfit = y - ax - nu;
      return nu * nu / (2.0 * sigma * sigma) + misfit * misfit / (2.0 * gamma * gamma);
    };

    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double nu = -4.0 + 8.0 * k / 10000.0;
      best = std::min(best, objective(nu));
    }
    CHECK(objective(nu_hat) <= best + 1e-12);
  }
}

TEST_CASE("refine: limits in the fidelity scale") {
  const Tensor y = Tensor::vector({0.9});
  const Tensor ax = Tensor::vector({-0.4});
  const Refined strong = refine_measurement(y, ax, RefineParams{0.05, 1e6});
  CHECK(strong.ybar[0] == doctest::Approx(0.9).epsilon(1e-9));
  const Refined weak = refine_measurement(y, ax, RefineParams{0.05, 1e-6});
  CHECK(weak.ybar[0] == doctest::Approx(-0.4).epsilon(1e-6));
}

TEST_CASE("refine: invalid arguments") {
  CHECK_THROWS_AS(refine_measurement(Tensor({2}), Tensor({3}), RefineParams{0.1, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(refine_measurement(Tensor({2}), Tensor({2}), RefineParams{-0.1, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(refine_measurement(Tensor({2}), Tensor({2}), RefineParams{0.1, 0.0}),
                  std::invalid_argument);
}
