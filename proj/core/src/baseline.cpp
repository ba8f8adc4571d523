#include "cuescreen/baseline.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cuescreen/error.hpp"

namespace cuescreen::baseline {

namespace {

std::size_t check_shape(const Matrix& features, std::span<const Label> labels) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(features.size()) + " rows but " +
                                                  std::to_string(labels.size()) + " labels");
  }
  if (features.empty()) return 0;
  const std::size_t dim = features.front().size();
  for (const auto& row : features) {
    if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged feature matrix");
  }
  return dim;
}

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t dim) {
  if (names.empty()) {
    for (std::size_t i = 0; i < dim; ++i) names.push_back("f" + std::to_string(i));
  }
  if (names.size() != dim) throw Error(ErrorCode::DimensionMismatch, "feature_names size differs from data");
  return names;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void check_dim(std::size_t expected, std::span<const double> x) {
  if (x.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(expected) + " features, got " + std::to_string(x.size()));
  }
}

}  // namespace

double LdaModel::score(std::span<const double> x) const {
  // w.(x - midpoint) rather than w.x + b, so the midpoint scores exactly 0
  // under equal priors.
  if (x.size() != weights.size() || mean_ad.size() != weights.size() || mean_non_ad.size() != weights.size()) {
    return dot(weights, x) + bias;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += weights[i] * (x[i] - 0.5 * (mean_ad[i] + mean_non_ad[i]));
  }
  return s + std::log(prior_ad / prior_non_ad);
}

LdaModel fit_lda(const Matrix& features, std::span<const Label> labels, std::vector<std::string> feature_names) {
  const std::size_t dim = check_shape(features, labels);
  std::size_t n_ad = 0;
  for (const Label l : labels) n_ad += l == Label::AD ? 1 : 0;
  const std::size_t n_non = labels.size() - n_ad;
  if (n_ad < 2 || n_non < 2) {
    throw Error(ErrorCode::DegenerateClass,
                "need >= 2 examples per class (AD " + std::to_string(n_ad) + ", non_AD " + std::to_string(n_non) + ")");
  }
  const auto d = static_cast<Eigen::Index>(dim);

  Eigen::VectorXd mu_ad = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mu_non = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < features.size(); ++i) {
    (labels[i] == Label::AD ? mu_ad : mu_non) += to_eigen(features[i]);
  }
  mu_ad /= static_cast<double>(n_ad);
  mu_non /= static_cast<double>(n_non);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Eigen::VectorXd centred = to_eigen(features[i]) - (labels[i] == Label::AD ? mu_ad : mu_non);
    scatter.noalias() += centred * centred.transpose();
  }
  Eigen::MatrixXd cov = scatter / static_cast<double>(labels.size() - 2);
  const double ridge = 1e-6 * cov.trace() / static_cast<double>(dim);
  cov.diagonal().array() += ridge;

  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !(ridge > 0.0) || !cov.allFinite()) {
    throw Error(ErrorCode::SingularCovariance, "pooled covariance is not positive-definite after ridge");
  }

  LdaModel model;
  model.feature_names = default_names(std::move(feature_names), dim);
  model.mean_ad = to_std(mu_ad);
  model.mean_non_ad = to_std(mu_non);
  model.prior_ad = static_cast<double>(n_ad) / static_cast<double>(labels.size());
  model.prior_non_ad = static_cast<double>(n_non) / static_cast<double>(labels.size());
  model.pooled_covariance.assign(dim, std::vector<double>(dim));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      model.pooled_covariance[r][c] = cov(r, c);
    }
  }
  const Eigen::VectorXd inv_ad = llt.solve(mu_ad);
  const Eigen::VectorXd inv_non = llt.solve(mu_non);
  model.weights = to_std(inv_ad - inv_non);
  model.bias = -0.5 * (mu_ad.dot(inv_ad) - mu_non.dot(inv_non)) + std::log(model.prior_ad / model.prior_non_ad);
  return model;
}

double LogisticModel::score(std::span<const double> x) const { return dot(weights, x) + bias; }

double logistic_loss(std::span<const double> weights, double bias, const Matrix& features,
                     std::span<const Label> labels, double l2) {
  check_shape(features, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    check_dim(weights.size(), features[i]);
    const double z = dot(weights, features[i]) + bias;
    total += softplus(z) - (labels[i] == Label::AD ? z : 0.0);
  }
  const double n = features.empty() ? 1.0 : static_cast<double>(features.size());
  return total / n + 0.5 * l2 * dot(weights, weights);
}

std::vector<double> logistic_gradient(std::span<const double> weights, double bias, const Matrix& features,
                                      std::span<const Label> labels, double l2) {
  check_shape(features, labels);
  std::vector<double> grad(weights.size() + 1, 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    check_dim(weights.size(), features[i]);
    const double residual = sigmoid(dot(weights, features[i]) + bias) - (labels[i] == Label::AD ? 1.0 : 0.0);
    for (std::size_t k = 0; k < weights.size(); ++k) grad[k] += residual * features[i][k];
    grad.back() += residual;
  }
  const double n = features.empty() ? 1.0 : static_cast<double>(features.size());
  for (std::size_t k = 0; k < weights.size(); ++k) grad[k] = grad[k] / n + l2 * weights[k];
  grad.back() /= n;
  return grad;
}

LogisticModel fit_logistic(const Matrix& features, std::span<const Label> labels, const LogisticHyper& hyper,
                           std::vector<std::string> feature_names) {
  if (!(hyper.learning_rate > 0.0) || hyper.epochs < 1 || !(hyper.l2 >= 0.0) || !std::isfinite(hyper.learning_rate)) {
    throw Error(ErrorCode::InvalidHyperparameters, "need lr > 0, epochs >= 1, l2 >= 0");
  }
  const std::size_t dim = check_shape(features, labels);
  LogisticModel model;
  model.feature_names = default_names(std::move(feature_names), dim);
  model.weights.assign(dim, 0.0);
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto grad = logistic_gradient(model.weights, model.bias, features, labels, hyper.l2);
    for (std::size_t k = 0; k < dim; ++k) model.weights[k] -= hyper.learning_rate * grad[k];
    model.bias -= hyper.learning_rate * grad.back();
    const double loss = logistic_loss(model.weights, model.bias, features, labels, hyper.l2);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch) +
                                                "; lower the learning rate");
    }
    model.training_log.push_back({epoch, loss});
  }
  return model;
}

Prediction predict(const LdaModel& model, std::span<const double> x, std::string participant_id) {
  check_dim(model.weights.size(), x);
  const double s = model.score(x);
  return {std::move(participant_id), label_from_score(s), s, PredictionSource::Lda};
}

Prediction predict(const LogisticModel& model, std::span<const double> x, std::string participant_id) {
  check_dim(model.weights.size(), x);
  const double s = model.score(x);
  return {std::move(participant_id), label_from_score(s), s, PredictionSource::Logistic};
}

Standardizer Standardizer::fit(const Matrix& features) {
  Standardizer s;
  if (features.empty()) return s;
  const std::size_t dim = features.front().size();
  s.mean.assign(dim, 0.0);
  s.scale.assign(dim, 1.0);
  for (const auto& row : features) {
    for (std::size_t k = 0; k < dim; ++k) s.mean[k] += row[k];
  }
  for (double& m : s.mean) m /= static_cast<double>(features.size());
  std::vector<double> var(dim, 0.0);
  for (const auto& row : features) {
    for (std::size_t k = 0; k < dim; ++k) var[k] += (row[k] - s.mean[k]) * (row[k] - s.mean[k]);
  }
  for (std::size_t k = 0; k < dim; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(features.size()));
    s.scale[k] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  check_dim(mean.size(), x);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / scale[k];
  return out;
}

Matrix Standardizer::apply(const Matrix& features) const {
  Matrix out;
  out.reserve(features.size());
  for (const auto& row : features) out.push_back(apply(row));
  return out;
}

namespace {

nlohmann::ordered_json standardizer_json(const Standardizer* s) {
  if (s == nullptr) return nullptr;
  return {{"mean", s->mean}, {"scale", s->scale}};
}

std::optional<Standardizer> standardizer_from(const nlohmann::json& j) {
  if (!j.contains("standardizer") || j["standardizer"].is_null()) return std::nullopt;
  Standardizer s;
  s.mean = j["standardizer"].at("mean").get<std::vector<double>>();
  s.scale = j["standardizer"].at("scale").get<std::vector<double>>();
  return s;
}

void check_header(const nlohmann::json& j, std::string_view kind, const std::vector<std::string>& expected) {
  if (j.value("format_version", 0) != kModelFormatVersion) {
    throw Error(ErrorCode::MalformedRecord, "unsupported model format_version");
  }
  if (j.value("model", std::string{}) != kind) {
    throw Error(ErrorCode::MalformedRecord, "expected a " + std::string(kind) + " model");
  }
  const auto names = j.at("feature_names").get<std::vector<std::string>>();
  if (names != expected) {
    throw Error(ErrorCode::FeatureMismatch, "model was trained on different feature_names");
  }
}

}  // namespace

nlohmann::ordered_json to_json(const LdaModel& m, const Standardizer* standardizer) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["model"] = "lda";
  j["feature_names"] = m.feature_names;
  j["class_means"] = {{"AD", m.mean_ad}, {"non_AD", m.mean_non_ad}};
  j["pooled_covariance"] = m.pooled_covariance;
  j["priors"] = {{"AD", m.prior_ad}, {"non_AD", m.prior_non_ad}};
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["standardizer"] = standardizer_json(standardizer);
  return j;
}

nlohmann::ordered_json to_json(const LogisticModel& m, const Standardizer* standardizer) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["model"] = "logistic";
  j["feature_names"] = m.feature_names;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& e : m.training_log) log.push_back({{"epoch", e.epoch}, {"loss", e.loss}});
  j["training_log"] = std::move(log);
  j["standardizer"] = standardizer_json(standardizer);
  return j;
}

Loaded<LdaModel> lda_from_json(const nlohmann::json& j, const std::vector<std::string>& expected) {
  try {
    check_header(j, "lda", expected);
    Loaded<LdaModel> out;
    auto& m = out.model;
    m.feature_names = expected;
    m.mean_ad = j.at("class_means").at("AD").get<std::vector<double>>();
    m.mean_non_ad = j.at("class_means").at("non_AD").get<std::vector<double>>();
    m.pooled_covariance = j.at("pooled_covariance").get<Matrix>();
    m.prior_ad = j.at("priors").at("AD").get<double>();
    m.prior_non_ad = j.at("priors").at("non_AD").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    if (m.weights.size() != expected.size()) throw Error(ErrorCode::DimensionMismatch, "weights size");
    out.standardizer = standardizer_from(j);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("lda model: ") + e.what());
  }
}

Loaded<LogisticModel> logistic_from_json(const nlohmann::json& j, const std::vector<std::string>& expected) {
  try {
    check_header(j, "logistic", expected);
    Loaded<LogisticModel> out;
    auto& m = out.model;
    m.feature_names = expected;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    for (const auto& e : j.at("training_log")) {
      m.training_log.push_back({e.at("epoch").get<std::size_t>(), e.at("loss").get<double>()});
    }
    if (m.weights.size() != expected.size()) throw Error(ErrorCode::DimensionMismatch, "weights size");
    out.standardizer = standardizer_from(j);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("logistic model: ") + e.what());
  }
}

}  // namespace cuescreen::baseline
