#include "rds/denoiser.hpp"

#include "rds/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rds {
namespace {

// Conditional mean of x0 given x_t for a diagonal Gaussian prior:
//   mean + alpha var / (alpha^2 var + sigma^2) * (x_t - alpha mean).
Array gaussian_posterior_mean(const Tensor& mean, const Tensor& var, const Tensor& x_t,
                              double alpha, double sigma) {
  const Array gain = alpha * var.array() / (alpha * alpha * var.array() + sigma * sigma);
  return mean.array() + gain * (x_t.array() - alpha * mean.array());
}

// log N(x; m, v) summed over coordinates, v the per-coordinate variance.
double log_marginal(const Tensor& x, const Array& m, const Array& v) {
  const Array diff = x.array() - m;
  constexpr double log2pi = 1.8378770664093453;  // log(2 pi)
  return -0.5 * (diff.square() / v + v.log() + log2pi).sum();
}

}  // namespace

DataPredictionModel DataPredictionModel::gaussian(GaussianPrior prior) {
  require_same_shape(prior.mean, prior.var, "gaussian prior");
  if (!(prior.var.array() > 0.0).all())
    throw std::invalid_argument("gaussian prior: variances must be positive");
  DataPredictionModel m;
  m.shape_ = prior.mean.shape();
  m.model_ = std::move(prior);
  return m;
}

DataPredictionModel DataPredictionModel::gmm(GmmPrior prior) {
  if (prior.weights.empty() || prior.weights.size() != prior.means.size() ||
      prior.weights.size() != prior.vars.size())
    throw std::invalid_argument("gmm prior: component lists must be non-empty and equal length");
  double total = 0.0;
  for (double w : prior.weights) {
    if (!(w > 0)) throw std::invalid_argument("gmm prior: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("gmm prior: weights must sum to 1");
  for (std::size_t k = 0; k < prior.means.size(); ++k) {
    require_same_shape(prior.means[k], prior.means[0], "gmm prior means");
    require_same_shape(prior.vars[k], prior.means[0], "gmm prior vars");
    if (!(prior.vars[k].array() > 0.0).all())
      throw std::invalid_argument("gmm prior: variances must be positive");
  }
  DataPredictionModel m;
  m.shape_ = prior.means[0].shape();
  m.model_ = std::move(prior);
  return m;
}

DataPredictionModel DataPredictionModel::external(std::shared_ptr<ExternalModel> handle) {
  if (!handle) throw std::invalid_argument("external model: null handle");
  DataPredictionModel m;
  m.model_ = std::move(handle);
  return m;
}

bool DataPredictionModel::analytic() const {
  return !std::holds_alternative<std::shared_ptr<ExternalModel>>(model_);
}

Tensor DataPredictionModel::predict(const Tensor& x_t, double t,
                                    const NoiseSchedule& schedule) const {
  if (const auto* ext = std::get_if<std::shared_ptr<ExternalModel>>(&model_))
    return (*ext)->predict(x_t, t);

  const auto [alpha, sigma] = schedule.eval(t);
  if (const auto* g = std::get_if<GaussianPrior>(&model_)) {
    require_same_shape(x_t, g->mean, "posterior_mean_x0");
    return x_t.with_values(gaussian_posterior_mean(g->mean, g->var, x_t, alpha, sigma));
  }

  const auto& gmm = std::get<GmmPrior>(model_);
  require_same_shape(x_t, gmm.means[0], "posterior_mean_x0");
  const std::size_t K = gmm.weights.size();

  // Responsibilities from the per-component marginal of x_t, in log space.
  std::vector<double> logp(K);
  double logp_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const Array m = alpha * gmm.means[k].array();
    const Array v = alpha * alpha * gmm.vars[k].array() + sigma * sigma;
    logp[k] = std::log(gmm.weights[k]) + log_marginal(x_t, m, v);
    logp_max = std::max(logp_max, logp[k]);
  }
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) z += std::exp(logp[k] - logp_max);

  Array acc = Array::Zero(x_t.size());
  for (std::size_t k = 0; k < K; ++k) {
    const double resp = std::exp(logp[k] - logp_max) / z;
    acc += resp * gaussian_posterior_mean(gmm.means[k], gmm.vars[k], x_t, alpha, sigma);
  }
  return x_t.with_values(std::move(acc));
}

Tensor DataPredictionModel::draw(RngStream& rng) const {
  if (const auto* g = std::get_if<GaussianPrior>(&model_)) {
    Tensor eps = rng.gaussian(g->mean.shape());
    return g->mean.with_values(g->mean.array() + g->var.array().sqrt() * eps.array());
  }
  if (const auto* gmm = std::get_if<GmmPrior>(&model_)) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    std::size_t pick = gmm->weights.size() - 1;
    for (std::size_t k = 0; k < gmm->weights.size(); ++k) {
      cum += gmm->weights[k];
      if (u <= cum) {
        pick = k;
        break;
      }
    }
    Tensor eps = rng.gaussian(gmm->means[pick].shape());
    return gmm->means[pick].with_values(gmm->means[pick].array() +
                                        gmm->vars[pick].array().sqrt() * eps.array());
  }
  throw unsupported_operation("draw: external models cannot sample ground truth");
}

Tensor posterior_mean_x0(const DataPredictionModel& model, const Tensor& x_t, double t,
                         const NoiseSchedule& schedule) {
  return model.predict(x_t, t, schedule);
}

Tensor score_from_prediction(const Tensor& x0hat, const Tensor& x_t, double alpha, double sigma) {
  require_same_shape(x0hat, x_t, "score_from_prediction");
  if (!(sigma > 0)) throw std::domain_error("score_from_prediction: sigma must be positive");
  return x_t.with_values((alpha * x0hat.array() - x_t.array()) / (sigma * sigma));
}

Tensor ddim_step(const Tensor& x_from, const Tensor& x0_pred, double alpha_from, double sigma_from,
                 double alpha_to, double sigma_to) {
  require_same_shape(x_from, x0_pred, "ddim_step");
  if (!(sigma_from > 0)) throw std::domain_error("ddim_step: source sigma must be positive");
  // Written so the prediction coefficient stays finite at sigma_to = 0 and
  // the step is an exact identity when both endpoints coincide.
  const double latent_coef = sigma_to / sigma_from;
  const double pred_coef = alpha_to - latent_coef * alpha_from;
  return x_from.with_values(latent_coef * x_from.array() + pred_coef * x0_pred.array());
}

Tensor ddim_multistep_x0(const DataPredictionModel& model, const Tensor& x_t, double t,
                         const NoiseSchedule& schedule, const EstimatorConfig& cfg) {
  if (!(t > 0)) throw std::invalid_argument("ddim_multistep_x0: t must be positive");
  if (cfg.inner_steps < 1)
    throw std::invalid_argument("ddim_multistep_x0: inner step count must be >= 1");

  if (cfg.method == EstimatorConfig::Method::tweedie_single)
    return posterior_mean_x0(model, x_t, t, schedule);

  const int K = cfg.inner_steps;
  Tensor x = x_t;
  for (int j = 0; j < K; ++j) {
    const double t_from = t * static_cast<double>(K - j) / K;
    const double t_to = t * static_cast<double>(K - j - 1) / K;
    const auto [a_from, s_from] = schedule.eval(t_from);
    const auto [a_to, s_to] = schedule.eval(t_to);
    const Tensor x0p = posterior_mean_x0(model, x, t_from, schedule);
    x = ddim_step(x, x0p, a_from, s_from, a_to, s_to);
  }
  return x;
}

}  // namespace rds
