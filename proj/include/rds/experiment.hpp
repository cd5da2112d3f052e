#pragma once

#include "rds/denoiser.hpp"
#include "rds/metrics.hpp"
#include "rds/operators.hpp"
#include "rds/sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rds {

enum class Method { robust_gd, robust_cg, l2_gd, l2_cg };

std::string method_name(Method m);
std::string task_name(OperatorSpec::Task t);

/// How ground-truth signals and the matching prediction model are built.
struct PriorSpec {
  enum class Kind { gaussian, gmm, external };
  Kind kind = Kind::gaussian;

  // gaussian: smooth mean field plus per-pixel variance
  std::string mean_pattern = "sine";  // "sine" or "constant"
  double mean_scale = 0.3;
  double mean_value = 0.0;
  double variance = 0.04;

  // gmm: constant-mean components
  std::vector<double> weights;
  std::vector<double> component_means;
  std::vector<double> component_vars;

  // external: command line of the child process
  std::string command;
};

Tensor prior_mean_field(const PriorSpec& spec, const Shape& shape);
DataPredictionModel build_prior_model(const PriorSpec& spec, const Shape& shape);

struct ExperimentConfig {
  OperatorSpec::Task task = OperatorSpec::Task::inpainting;
  Shape signal_shape{32, 32};
  OperatorSpec op;
  CorruptionSpec corruption{};

  int outer_steps = 200;
  GridSpacing spacing{};
  NoiseSchedule::Kind schedule_kind = NoiseSchedule::Kind::vp_linear;
  EstimatorConfig estimator{};
  HuberParams huber{};
  RSchedule r_schedule = RSchedule::constant(16.0);
  GdConfig gd{};
  CgConfig cg{};

  PriorSpec prior{};
  std::vector<Method> methods{Method::robust_cg, Method::l2_cg};
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string ground_truth_path;  // optional: load the signal instead of sampling it
  bool record_wall_time = false;  // off by default so results.csv is byte-reproducible
  bool save_tensors = true;
  bool save_pgm = false;
  int threads = 0;  // 0 = hardware concurrency
};

struct ResultRow {
  OperatorSpec::Task task;
  Method method;
  double rho = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
  double wall_s = 0.0;
  bool failed = false;
  std::string error;
};

/// Parse and validate a JSON experiment config. Unknown keys are rejected
/// with the offending path. The RDS_SEED environment variable, when set,
/// overrides the config seed.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// One run per (repeat, method): draw or load the ground truth, degrade
/// it, run the configured sampler, and score against the truth. Failures
/// are captured per row; the batch always completes. Repeats execute in a
/// worker pool but rows come back in config order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// Fixed header: task,method,rho,sigma,seed,psnr,ssim,mse,wall_s
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace rds
