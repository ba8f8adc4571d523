#pragma once

// Interpretable reference classifiers over feature vectors: two-class linear
// discriminant analysis with a pooled covariance, and L2-regularised
// logistic regression trained by full-batch gradient descent.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/types.hpp"

namespace cuescreen::baseline {

/// Row-major design matrix: one row per example.
using Matrix = std::vector<std::vector<double>>;

struct LdaModel {
  std::vector<double> mean_ad;
  std::vector<double> mean_non_ad;
  Matrix pooled_covariance;  // ridge included
  double prior_ad = 0.5;
  double prior_non_ad = 0.5;
  std::vector<std::string> feature_names;
  // Discriminant difference (AD minus non_AD) collapsed to w.x + b. The
  // bias is exported for consumers; score() evaluates the same function
  // relative to the class midpoint.
  std::vector<double> weights;
  double bias = 0.0;

  /// delta_AD(x) - delta_nonAD(x), log priors included.
  double score(std::span<const double> x) const;
};

/// Pooled within-class covariance uses the (n - 2) divisor and always gets a
/// ridge of 1e-6 * trace / dim. Errors: DegenerateClass (< 2 examples in a
/// class), SingularCovariance (not positive-definite after the ridge),
/// DimensionMismatch.
LdaModel fit_lda(const Matrix& features, std::span<const Label> labels, std::vector<std::string> feature_names = {});

struct LogisticHyper {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 0.0;
};

struct EpochLoss {
  std::size_t epoch;  // 1-based
  double loss;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::string> feature_names;
  std::vector<EpochLoss> training_log;

  double score(std::span<const double> x) const;
};

/// Mean negative log-likelihood with AD = 1, plus (l2 / 2) * |w|^2 (the bias
/// is not penalised).
double logistic_loss(std::span<const double> weights, double bias, const Matrix& features,
                     std::span<const Label> labels, double l2);

/// Gradient of logistic_loss; the last element is d/d(bias).
std::vector<double> logistic_gradient(std::span<const double> weights, double bias, const Matrix& features,
                                      std::span<const Label> labels, double l2);

/// Full-batch gradient descent starting from zero. The loss after each
/// epoch's update is logged. Errors: InvalidHyperparameters, NonFiniteLoss,
/// DimensionMismatch.
LogisticModel fit_logistic(const Matrix& features, std::span<const Label> labels, const LogisticHyper& hyper,
                           std::vector<std::string> feature_names = {});

/// Errors: DimensionMismatch.
Prediction predict(const LdaModel& model, std::span<const double> x, std::string participant_id = {});
Prediction predict(const LogisticModel& model, std::span<const double> x, std::string participant_id = {});

/// Per-feature z-scoring fitted on training data. Features with zero spread
/// are centred but not scaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& features);
  std::vector<double> apply(std::span<const double> x) const;
  Matrix apply(const Matrix& features) const;
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::ordered_json to_json(const LdaModel& model, const Standardizer* standardizer = nullptr);
nlohmann::ordered_json to_json(const LogisticModel& model, const Standardizer* standardizer = nullptr);

/// Loaded model plus the standardizer it was trained behind, if any.
template <typename Model>
struct Loaded {
  Model model;
  std::optional<Standardizer> standardizer;
};

/// Refuses (Error(FeatureMismatch)) when the stored feature_names differ from
/// `expected_feature_names`; MalformedRecord on schema errors.
Loaded<LdaModel> lda_from_json(const nlohmann::json& j, const std::vector<std::string>& expected_feature_names);
Loaded<LogisticModel> logistic_from_json(const nlohmann::json& j,
                                         const std::vector<std::string>& expected_feature_names);

}  // namespace cuescreen::baseline
