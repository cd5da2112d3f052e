#pragma once

#include "rds/external_model.hpp"
#include "rds/rng.hpp"
#include "rds/schedule.hpp"
#include "rds/tensor.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace rds {

/// Diagonal Gaussian prior N(mean, diag(var)); var entries must be > 0.
struct GaussianPrior {
  Tensor mean;
  Tensor var;
};

/// Mixture of diagonal Gaussians; weights positive, summing to one.
struct GmmPrior {
  std::vector<double> weights;
  std::vector<Tensor> means;
  std::vector<Tensor> vars;
};

/// The clean-signal predictor x0 = f(x_t, t). Analytic kinds evaluate the
/// exact conditional mean under their prior; the external kind forwards
/// the query to a child process.
class DataPredictionModel {
 public:
  static DataPredictionModel gaussian(GaussianPrior prior);
  static DataPredictionModel gmm(GmmPrior prior);
  static DataPredictionModel external(std::shared_ptr<ExternalModel> handle);

  bool analytic() const;
  const Shape& signal_shape() const { return shape_; }

  const GaussianPrior* as_gaussian() const { return std::get_if<GaussianPrior>(&model_); }
  const GmmPrior* as_gmm() const { return std::get_if<GmmPrior>(&model_); }

  Tensor predict(const Tensor& x_t, double t, const NoiseSchedule& schedule) const;

  /// Sample a ground-truth signal from an analytic prior.
  Tensor draw(RngStream& rng) const;

 private:
  DataPredictionModel() = default;

  std::variant<GaussianPrior, GmmPrior, std::shared_ptr<ExternalModel>> model_;
  Shape shape_;
};

/// Conditional mean of the clean signal given x_t under the model's prior
/// (external kinds are routed to their process).
Tensor posterior_mean_x0(const DataPredictionModel& model, const Tensor& x_t, double t,
                         const NoiseSchedule& schedule);

/// (alpha x0hat - x_t) / sigma^2, the score of the time-t marginal implied
/// by a prediction x0hat. sigma must be positive.
Tensor score_from_prediction(const Tensor& x0hat, const Tensor& x_t, double alpha, double sigma);

/// One deterministic reverse step between two schedule points.
Tensor ddim_step(const Tensor& x_from, const Tensor& x0_pred, double alpha_from, double sigma_from,
                 double alpha_to, double sigma_to);

struct EstimatorConfig {
  enum class Method { tweedie_single, ddim_multistep };
  int inner_steps = 5;  // K
  Method method = Method::ddim_multistep;
};

/// Clean-signal estimate obtained by integrating K deterministic reverse
/// steps from t down to 0 on a uniform sub-grid. K = 1 (or the
/// tweedie_single method) reduces to posterior_mean_x0.
Tensor ddim_multistep_x0(const DataPredictionModel& model, const Tensor& x_t, double t,
                         const NoiseSchedule& schedule, const EstimatorConfig& cfg);

}  // namespace rds
