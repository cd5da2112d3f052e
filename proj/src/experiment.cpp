#include "rds/experiment.hpp"

#include "rds/errors.hpp"
#include "rds/rng.hpp"
#include "rds/tensor_io.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

namespace rds {
namespace {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return RngStream::derived(seed, index).next_u64();
}

// ---------------------------------------------------------------------
// Config parsing

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw validation_error(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw validation_error(path + "." + key, "wrong type");
  }
}

OperatorSpec::Task parse_task(const std::string& name) {
  using Task = OperatorSpec::Task;
  if (name == "inpainting") return Task::inpainting;
  if (name == "super_resolution") return Task::super_resolution;
  if (name == "gaussian_deblur") return Task::gaussian_deblur;
  if (name == "motion_deblur") return Task::motion_deblur;
  if (name == "nonlinear_deblur") return Task::nonlinear_deblur;
  throw validation_error("task", "unknown task '" + name + "'");
}

Method parse_method(const std::string& name) {
  if (name == "robust_gd") return Method::robust_gd;
  if (name == "robust_cg") return Method::robust_cg;
  if (name == "l2_gd") return Method::l2_gd;
  if (name == "l2_cg") return Method::l2_cg;
  throw validation_error("methods", "unknown method '" + name + "'");
}

OperatorSpec parse_operator(const json& obj, OperatorSpec::Task task) {
  check_keys(obj, "operator",
             {"mask_ratio", "factor", "kernel_size", "kernel_std", "motion_length",
              "motion_cross_std", "gain", "boundary"});
  OperatorSpec spec;
  spec.task = task;
  spec.mask_ratio = get_or(obj, "operator", "mask_ratio", spec.mask_ratio);
  spec.factor = get_or(obj, "operator", "factor", spec.factor);
  spec.kernel_size = get_or(obj, "operator", "kernel_size", spec.kernel_size);
  spec.kernel_std = get_or(obj, "operator", "kernel_std", spec.kernel_std);
  spec.motion_length = get_or(obj, "operator", "motion_length", spec.motion_length);
  spec.motion_cross_std = get_or(obj, "operator", "motion_cross_std", spec.motion_cross_std);
  spec.gain = get_or(obj, "operator", "gain", spec.gain);
  const std::string boundary = get_or<std::string>(obj, "operator", "boundary", "replicate");
  if (boundary == "replicate")
    spec.boundary = Boundary::replicate;
  else if (boundary == "zero")
    spec.boundary = Boundary::zero;
  else
    throw validation_error("operator.boundary", "must be 'replicate' or 'zero'");

  if (!(spec.mask_ratio >= 0.0 && spec.mask_ratio < 1.0))
    throw validation_error("operator.mask_ratio", "must lie in [0, 1)");
  if (spec.factor < 1) throw validation_error("operator.factor", "must be >= 1");
  if (spec.kernel_size < 1 || spec.kernel_size % 2 == 0)
    throw validation_error("operator.kernel_size", "must be odd and positive");
  if (!(spec.kernel_std > 0)) throw validation_error("operator.kernel_std", "must be positive");
  if (!(spec.gain > 0)) throw validation_error("operator.gain", "must be positive");
  return spec;
}

CorruptionSpec parse_corruption(const json& obj) {
  check_keys(obj, "corruption", {"rho", "sigma", "xi"});
  CorruptionSpec spec;
  spec.rho = get_or(obj, "corruption", "rho", 0.0);
  spec.sigma = get_or(obj, "corruption", "sigma", 0.05);
  spec.xi = get_or(obj, "corruption", "xi", -1.0);
  if (!(spec.rho >= 0.0 && spec.rho < 1.0))
    throw validation_error("corruption.rho", "must lie in [0, 1)");
  if (spec.sigma < 0) throw validation_error("corruption.sigma", "must be >= 0");
  return spec;
}

PriorSpec parse_prior(const json& obj) {
  check_keys(obj, "prior",
             {"kind", "mean_pattern", "mean_scale", "mean_value", "variance", "weights",
              "component_means", "component_vars", "command"});
  PriorSpec spec;
  const std::string kind = get_or<std::string>(obj, "prior", "kind", "gaussian");
  if (kind == "gaussian")
    spec.kind = PriorSpec::Kind::gaussian;
  else if (kind == "gmm")
    spec.kind = PriorSpec::Kind::gmm;
  else if (kind == "external")
    spec.kind = PriorSpec::Kind::external;
  else
    throw validation_error("prior.kind", "must be 'gaussian', 'gmm', or 'external'");

  spec.mean_pattern = get_or<std::string>(obj, "prior", "mean_pattern", spec.mean_pattern);
  if (spec.mean_pattern != "sine" && spec.mean_pattern != "constant")
    throw validation_error("prior.mean_pattern", "must be 'sine' or 'constant'");
  spec.mean_scale = get_or(obj, "prior", "mean_scale", spec.mean_scale);
  spec.mean_value = get_or(obj, "prior", "mean_value", spec.mean_value);
  spec.variance = get_or(obj, "prior", "variance", spec.variance);
  spec.weights = get_or(obj, "prior", "weights", spec.weights);
  spec.component_means = get_or(obj, "prior", "component_means", spec.component_means);
  spec.component_vars = get_or(obj, "prior", "component_vars", spec.component_vars);
  spec.command = get_or<std::string>(obj, "prior", "command", spec.command);

  if (spec.kind == PriorSpec::Kind::gaussian && !(spec.variance > 0))
    throw validation_error("prior.variance", "must be positive");
  if (spec.kind == PriorSpec::Kind::gmm &&
      (spec.weights.empty() || spec.weights.size() != spec.component_means.size() ||
       spec.weights.size() != spec.component_vars.size()))
    throw validation_error("prior.weights", "gmm needs equal-length weights/means/vars");
  if (spec.kind == PriorSpec::Kind::external && spec.command.empty())
    throw validation_error("prior.command", "external prior needs a command");
  return spec;
}

double parse_delta(const json& solver) {
  if (!solver.contains("delta")) return HuberParams{}.delta;
  const auto& d = solver.at("delta");
  if (d.is_string()) {
    if (d.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw validation_error("solver.delta", "must be a positive number or 'inf'");
  }
  const double v = d.get<double>();
  if (!(v > 0)) throw validation_error("solver.delta", "must be positive");
  return v;
}

void parse_solver(const json& obj, ExperimentConfig& cfg) {
  check_keys(obj, "solver",
             {"outer_steps", "grid", "schedule", "estimator", "delta", "r_schedule", "gd", "cg"});
  cfg.outer_steps = get_or(obj, "solver", "outer_steps", cfg.outer_steps);
  if (cfg.outer_steps < 1) throw validation_error("solver.outer_steps", "must be >= 1");

  if (obj.contains("grid")) {
    const json& g = obj.at("grid");
    check_keys(g, "solver.grid", {"spacing", "power"});
    const std::string spacing = get_or<std::string>(g, "solver.grid", "spacing", "polynomial");
    if (spacing == "uniform")
      cfg.spacing = GridSpacing::uniform();
    else if (spacing == "polynomial")
      cfg.spacing = GridSpacing::polynomial(get_or(g, "solver.grid", "power", 2.0));
    else
      throw validation_error("solver.grid.spacing", "must be 'uniform' or 'polynomial'");
  }

  if (obj.contains("schedule")) {
    const json& s = obj.at("schedule");
    check_keys(s, "solver.schedule", {"kind"});
    const std::string kind = get_or<std::string>(s, "solver.schedule", "kind", "vp_linear");
    if (kind == "vp_linear")
      cfg.schedule_kind = NoiseSchedule::Kind::vp_linear;
    else if (kind == "vp_cosine")
      cfg.schedule_kind = NoiseSchedule::Kind::vp_cosine;
    else
      throw validation_error("solver.schedule.kind", "must be 'vp_linear' or 'vp_cosine'");
  }

  if (obj.contains("estimator")) {
    const json& e = obj.at("estimator");
    check_keys(e, "solver.estimator", {"inner_steps", "method"});
    cfg.estimator.inner_steps = get_or(e, "solver.estimator", "inner_steps", 5);
    if (cfg.estimator.inner_steps < 1)
      throw validation_error("solver.estimator.inner_steps", "must be >= 1");
    const std::string method = get_or<std::string>(e, "solver.estimator", "method", "ddim_multistep");
    if (method == "tweedie_single")
      cfg.estimator.method = EstimatorConfig::Method::tweedie_single;
    else if (method == "ddim_multistep")
      cfg.estimator.method = EstimatorConfig::Method::ddim_multistep;
    else
      throw validation_error("solver.estimator.method",
                             "must be 'tweedie_single' or 'ddim_multistep'");
  }

  cfg.huber.delta = parse_delta(obj);

  if (obj.contains("r_schedule")) {
    const json& r = obj.at("r_schedule");
    check_keys(r, "solver.r_schedule", {"kind", "value"});
    const std::string kind = get_or<std::string>(r, "solver.r_schedule", "kind", "constant");
    const double value = get_or(r, "solver.r_schedule", "value", 1.0);
    if (!(value > 0)) throw validation_error("solver.r_schedule.value", "must be positive");
    if (kind == "sigma_scaled")
      cfg.r_schedule = RSchedule::sigma_scaled(value);
    else if (kind == "constant")
      cfg.r_schedule = RSchedule::constant(value);
    else
      throw validation_error("solver.r_schedule.kind", "must be 'sigma_scaled' or 'constant'");
  }

  if (obj.contains("gd")) {
    const json& g = obj.at("gd");
    check_keys(g, "solver.gd", {"iterations", "eta_x"});
    cfg.gd.iterations = get_or(g, "solver.gd", "iterations", cfg.gd.iterations);
    cfg.gd.eta_x = get_or(g, "solver.gd", "eta_x", cfg.gd.eta_x);
    if (cfg.gd.iterations < 1) throw validation_error("solver.gd.iterations", "must be >= 1");
    if (!(cfg.gd.eta_x >= 0)) throw validation_error("solver.gd.eta_x", "must be >= 0");
  }

  if (obj.contains("cg")) {
    const json& c = obj.at("cg");
    check_keys(c, "solver.cg", {"iterations", "eta", "numerator"});
    cfg.cg.iterations = get_or(c, "solver.cg", "iterations", cfg.cg.iterations);
    cfg.cg.eta = get_or(c, "solver.cg", "eta", cfg.cg.eta);
    if (cfg.cg.iterations < 1) throw validation_error("solver.cg.iterations", "must be >= 1");
    if (!(cfg.cg.eta > 0)) throw validation_error("solver.cg.eta", "must be positive");
    const std::string numerator = get_or<std::string>(c, "solver.cg", "numerator", "gTg");
    if (numerator == "gTg")
      cfg.cg.numerator = CgNumerator::gTg;
    else if (numerator == "gTd")
      cfg.cg.numerator = CgNumerator::gTd;
    else
      throw validation_error("solver.cg.numerator", "must be 'gTg' or 'gTd'");
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::robust_gd: return "robust_gd";
    case Method::robust_cg: return "robust_cg";
    case Method::l2_gd: return "l2_gd";
    case Method::l2_cg: return "l2_cg";
  }
  return "?";
}

std::string task_name(OperatorSpec::Task t) {
  using Task = OperatorSpec::Task;
  switch (t) {
    case Task::inpainting: return "inpainting";
    case Task::super_resolution: return "super_resolution";
    case Task::gaussian_deblur: return "gaussian_deblur";
    case Task::motion_deblur: return "motion_deblur";
    case Task::nonlinear_deblur: return "nonlinear_deblur";
  }
  return "?";
}

Tensor prior_mean_field(const PriorSpec& spec, const Shape& shape) {
  if (spec.mean_pattern == "constant") return Tensor::constant(shape, spec.mean_value);
  Tensor mean(shape);
  if (shape.size() == 1) {
    for (Index i = 0; i < mean.size(); ++i)
      mean[i] = spec.mean_scale * std::sin(2.0 * std::numbers::pi * (i + 0.5) / shape[0]);
  } else {
    for (Index i = 0; i < shape[0]; ++i)
      for (Index j = 0; j < shape[1]; ++j)
        mean(i, j) = spec.mean_scale * std::sin(2.0 * std::numbers::pi * (i + 0.5) / shape[0]) *
                     std::cos(2.0 * std::numbers::pi * (j + 0.5) / shape[1]);
  }
  return mean;
}

DataPredictionModel build_prior_model(const PriorSpec& spec, const Shape& shape) {
  switch (spec.kind) {
    case PriorSpec::Kind::gaussian: {
      GaussianPrior prior;
      prior.mean = prior_mean_field(spec, shape);
      prior.var = Tensor::constant(shape, spec.variance);
      return DataPredictionModel::gaussian(std::move(prior));
    }
    case PriorSpec::Kind::gmm: {
      GmmPrior prior;
      prior.weights = spec.weights;
      for (std::size_t k = 0; k < spec.weights.size(); ++k) {
        prior.means.push_back(Tensor::constant(shape, spec.component_means[k]));
        prior.vars.push_back(Tensor::constant(shape, spec.component_vars[k]));
      }
      return DataPredictionModel::gmm(std::move(prior));
    }
    case PriorSpec::Kind::external:
      return DataPredictionModel::external(std::make_shared<ExternalModel>(spec.command));
  }
  throw std::invalid_argument("build_prior_model: unknown prior kind");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw validation_error("(root)", std::string("not valid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"task", "signal_shape", "operator", "corruption", "solver", "prior", "methods",
              "repeats", "seed", "output_dir", "ground_truth_path", "record_wall_time",
              "save_tensors", "save_pgm", "threads"});

  ExperimentConfig cfg;
  cfg.task = parse_task(get_or<std::string>(root, "", "task", "inpainting"));

  if (root.contains("signal_shape")) {
    const auto dims = root.at("signal_shape").get<std::vector<long long>>();
    if (dims.empty() || dims.size() > 2)
      throw validation_error("signal_shape", "must have 1 or 2 dimensions");
    cfg.signal_shape.clear();
    for (long long d : dims) {
      if (d < 1) throw validation_error("signal_shape", "dimensions must be positive");
      cfg.signal_shape.push_back(static_cast<Index>(d));
    }
  }

  cfg.op = root.contains("operator") ? parse_operator(root.at("operator"), cfg.task)
                                     : OperatorSpec{.task = cfg.task};
  cfg.corruption = root.contains("corruption") ? parse_corruption(root.at("corruption"))
                                               : CorruptionSpec{};
  if (root.contains("solver")) parse_solver(root.at("solver"), cfg);
  if (root.contains("prior")) cfg.prior = parse_prior(root.at("prior"));

  if (root.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : root.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    if (cfg.methods.empty()) throw validation_error("methods", "must not be empty");
  }

  cfg.repeats = get_or(root, "", "repeats", cfg.repeats);
  if (cfg.repeats < 1) throw validation_error("repeats", "must be >= 1");
  cfg.seed = get_or<std::uint64_t>(root, "", "seed", cfg.seed);
  cfg.output_dir = get_or<std::string>(root, "", "output_dir", cfg.output_dir);
  cfg.ground_truth_path = get_or<std::string>(root, "", "ground_truth_path", cfg.ground_truth_path);
  cfg.record_wall_time = get_or(root, "", "record_wall_time", cfg.record_wall_time);
  cfg.save_tensors = get_or(root, "", "save_tensors", cfg.save_tensors);
  cfg.save_pgm = get_or(root, "", "save_pgm", cfg.save_pgm);
  cfg.threads = get_or(root, "", "threads", cfg.threads);
  if (cfg.threads < 0) throw validation_error("threads", "must be >= 0");

  if (const char* env_seed = std::getenv("RDS_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env_seed, &end, 10);
    if (end == env_seed || *end != '\0')
      throw validation_error("RDS_SEED", "environment override is not an integer");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_experiment_config(text);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RunJob {
  int repeat;
  Method method;
};

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.prior.kind == PriorSpec::Kind::external && cfg.ground_truth_path.empty())
    throw validation_error("ground_truth_path",
                           "external priors cannot sample signals; provide a tensor file");
  fs::create_directories(cfg.output_dir);

  OperatorSpec op_spec = cfg.op;
  op_spec.mask_seed = derive_seed(cfg.seed, 0x6f70ull);
  const ForwardOperator op = build_operator(op_spec, cfg.signal_shape);

  const DataPredictionModel model = build_prior_model(cfg.prior, cfg.signal_shape);

  const NoiseSchedule schedule = cfg.schedule_kind == NoiseSchedule::Kind::vp_linear
                                     ? NoiseSchedule::vp_linear()
                                     : NoiseSchedule::vp_cosine();
  const TimeGrid grid = build_time_grid(cfg.outer_steps, schedule.terminal_time(), cfg.spacing);

  Tensor loaded_truth;
  const bool have_loaded_truth = !cfg.ground_truth_path.empty();
  if (have_loaded_truth) {
    loaded_truth = load_tensor(cfg.ground_truth_path);
    require_shape(loaded_truth, cfg.signal_shape, "ground_truth_path tensor");
  }

  std::vector<RunJob> jobs;
  for (int r = 0; r < cfg.repeats; ++r)
    for (Method m : cfg.methods) jobs.push_back({r, m});

  std::vector<ResultRow> rows(jobs.size());

  auto run_job = [&](std::size_t idx) {
    const RunJob& job = jobs[idx];
    const std::uint64_t run_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(job.repeat));

    ResultRow row;
    row.task = cfg.task;
    row.method = job.method;
    row.rho = cfg.corruption.rho;
    row.sigma = cfg.corruption.sigma;
    row.seed = run_seed;

    try {
      Tensor truth;
      if (have_loaded_truth) {
        truth = loaded_truth;
      } else {
        RngStream truth_rng = RngStream::derived(run_seed, 0x747275ull);
        truth = model.draw(truth_rng);
      }

      const Tensor y_clean = op_apply(op, truth);
      CorruptionSpec corruption = cfg.corruption;
      corruption.seed = run_seed;
      const Corrupted degraded = corrupt_measurement(y_clean, corruption);

      SolverConfig solver;
      solver.outer_steps = cfg.outer_steps;
      solver.estimator = cfg.estimator;
      solver.r_schedule = cfg.r_schedule;
      solver.sigma_noise = cfg.corruption.sigma;
      solver.seed = run_seed;
      const bool robust = job.method == Method::robust_gd || job.method == Method::robust_cg;
      solver.huber = robust ? cfg.huber : HuberParams::squared_l2();
      if (job.method == Method::robust_gd || job.method == Method::l2_gd)
        solver.inner = cfg.gd;
      else
        solver.inner = cfg.cg;

      const auto start = std::chrono::steady_clock::now();
      const SampleResult result = run_sampler(model, degraded.y, op, solver, schedule, grid);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      const MetricReport report = compute_metrics(result.x, truth);
      row.psnr = report.psnr;
      row.ssim = report.ssim;
      row.mse = report.mse;
      row.wall_s = cfg.record_wall_time ? elapsed : 0.0;

      if (cfg.save_tensors) {
        const std::string stem = cfg.output_dir + "/run_" + std::to_string(job.repeat) + "_" +
                                 method_name(job.method);
        save_tensor(stem + "_recon.rtn", result.x, "reconstruction");
        save_tensor(stem + "_truth.rtn", truth, "ground truth");
        save_tensor(stem + "_measurement.rtn", degraded.y, "degraded measurement");
      }
      if (cfg.save_pgm && result.x.rank() == 2) {
        const std::string stem = cfg.output_dir + "/run_" + std::to_string(job.repeat) + "_" +
                                 method_name(job.method);
        save_pgm(stem + "_recon.pgm", result.x);
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.psnr = row.ssim = row.mse = std::numeric_limits<double>::quiet_NaN();
      row.wall_s = 0.0;
    }
    rows[idx] = std::move(row);
  };

  // External models own a single child process; run those serially.
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  if (cfg.prior.kind == PriorSpec::Kind::external) n_threads = 1;
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) run_job(i);
      });
    }
    for (auto& t : workers) t.join();
  }

  write_results_csv(cfg.output_dir + "/results.csv", rows);
  return rows;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "task,method,rho,sigma,seed,psnr,ssim,mse,wall_s\n";
  for (const ResultRow& row : rows) {
    out << task_name(row.task) << "," << method_name(row.method) << "," << format_double(row.rho)
        << "," << format_double(row.sigma) << "," << row.seed << "," << format_double(row.psnr)
        << "," << format_double(row.ssim) << "," << format_double(row.mse) << ","
        << format_double(row.wall_s) << "\n";
  }
}

}  // namespace rds
