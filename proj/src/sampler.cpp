#include "rds/sampler.hpp"

#include "rds/errors.hpp"
#include "rds/rng.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace rds {

SampleResult run_sampler(const DataPredictionModel& model, const Tensor& y,
                         const ForwardOperator& op, const SolverConfig& cfg,
                         const NoiseSchedule& schedule, const TimeGrid& grid) {
  require_shape(y, op.output_shape(), "run_sampler measurement");
  require_finite(y, "run_sampler measurement");
  if (cfg.outer_steps < 1) throw std::invalid_argument("run_sampler: outer_steps must be >= 1");
  if (grid.steps() != cfg.outer_steps)
    throw std::invalid_argument("run_sampler: grid has " + std::to_string(grid.steps()) +
                                " steps, config expects " + std::to_string(cfg.outer_steps));
  if (cfg.sigma_noise < 0) throw std::invalid_argument("run_sampler: sigma_noise must be >= 0");

  RngStream rng(cfg.seed);
  Tensor latent = rng.gaussian(op.input_shape());

  SampleResult result;
  result.trace.steps.reserve(static_cast<std::size_t>(cfg.outer_steps));

  for (int i = cfg.outer_steps; i >= 1; --i) {
    const auto start = std::chrono::steady_clock::now();
    const double t = grid.times[static_cast<std::size_t>(i)];
    const double t_prev = grid.times[static_cast<std::size_t>(i - 1)];

    const Tensor x0hat = ddim_multistep_x0(model, latent, t, schedule, cfg.estimator);

    const double gamma_t = gamma_schedule(t, schedule);
    const Refined refined =
        refine_measurement(y, op_apply(op, x0hat), RefineParams{cfg.sigma_noise, gamma_t});

    RobustObjectiveParams params;
    params.r_t = cfg.r_schedule.eval(t, schedule);
    params.gamma_t = gamma_t;
    params.huber = cfg.huber;

    StepRecord record;
    record.t = t;
    record.objective_initial = robust_objective(x0hat, x0hat, refined.ybar, op, params);

    Tensor solved;
    try {
      if (const auto* gd = std::get_if<GdConfig>(&cfg.inner)) {
        solved = robust_gd_inner(x0hat, refined.ybar, op, params, *gd);
      } else {
        solved = robust_cg_inner(x0hat, refined.ybar, op, params, std::get<CgConfig>(cfg.inner));
      }
    } catch (const numerical_error& e) {
      throw numerical_error("outer step " + std::to_string(i) + ": " + e.what(), e.iteration());
    }

    record.objective_final = robust_objective(solved, x0hat, refined.ybar, op, params);
    record.prior_distance = norm(solved - x0hat);

    const auto [alpha_prev, sigma_prev] = schedule.eval(t_prev);
    const Tensor eps = rng.gaussian(solved.shape());
    latent = solved.with_values(alpha_prev * solved.array() + sigma_prev * eps.array());

    record.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.steps.push_back(record);
  }

  result.x = std::move(latent);
  require_finite(result.x, "run_sampler output");
  return result;
}

}  // namespace rds
