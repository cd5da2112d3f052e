#pragma once

#include "rds/denoiser.hpp"
#include "rds/inner_solver.hpp"
#include "rds/operators.hpp"
#include "rds/refine.hpp"
#include "rds/robust_loss.hpp"
#include "rds/schedule.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace rds {

/// Rule producing the prior-proximity scale r_t of the inner objective.
struct RSchedule {
  enum class Kind { sigma_scaled, constant };
  Kind kind = Kind::sigma_scaled;
  double value = 1.0;

  static RSchedule sigma_scaled(double c) { return {Kind::sigma_scaled, c}; }
  static RSchedule constant(double r) { return {Kind::constant, r}; }

  double eval(double t, const NoiseSchedule& schedule) const {
    return kind == Kind::sigma_scaled ? value * schedule.sigma(t) : value;
  }
};

struct SolverConfig {
  int outer_steps = 200;                          // N
  std::variant<GdConfig, CgConfig> inner = CgConfig{};
  HuberParams huber{};
  double sigma_noise = 0.05;                      // measurement noise level
  RSchedule r_schedule{};
  EstimatorConfig estimator{};
  std::uint64_t seed = 0;
};

struct StepRecord {
  double t = 0.0;
  double objective_initial = 0.0;  // composite objective at the inner start
  double objective_final = 0.0;    // and after the inner solve
  double prior_distance = 0.0;     // ||x_solved - x0hat||
  double wall_s = 0.0;
};

struct SampleTrace {
  std::vector<StepRecord> steps;  // one record per outer step
};

struct SampleResult {
  Tensor x;
  SampleTrace trace;
};

/// Full reverse loop: start from a standard normal latent, then per outer
/// step estimate the clean signal, refine the measurement, run the inner
/// solver, and re-noise to the previous grid time. The final grid time is
/// 0, so the returned tensor is the last inner solve's output.
SampleResult run_sampler(const DataPredictionModel& model, const Tensor& y,
                         const ForwardOperator& op, const SolverConfig& cfg,
                         const NoiseSchedule& schedule, const TimeGrid& grid);

}  // namespace rds
