#include "sigverify/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "sigverify/error.hpp"

namespace sigverify {

UserModel fit_user_model(const std::vector<FeatureVector>& vectors, double reg,
                         const std::string& user_id) {
  if (vectors.size() < 2)
    raise(ErrorCode::TooFewSamples, "user model needs at least 2 training vectors");
  if (reg < 0.0) raise(ErrorCode::ConfigError, "covariance regularization must be >= 0");
  const Eigen::Index D = vectors.front().values.size();
  for (const auto& v : vectors)
    if (v.values.size() != D)
      raise(ErrorCode::DimensionMismatch, "training vectors have mixed dimensions");

  UserModel m;
  m.user_id = user_id;
  m.reg = reg;
  m.train_count = static_cast<int>(vectors.size());
  m.mean = Eigen::VectorXd::Zero(D);
  for (const auto& v : vectors) m.mean += v.values;
  m.mean /= static_cast<double>(vectors.size());

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(D, D);
  for (const auto& v : vectors) {
    Eigen::VectorXd r = v.values - m.mean;
    scatter.noalias() += r * r.transpose();
  }
  m.covariance = scatter / static_cast<double>(vectors.size() - 1);

  const double trace = m.covariance.trace();
  const double ridge = trace > 0.0 ? reg * trace / static_cast<double>(D) : reg;
  m.covariance.diagonal().array() += ridge;

  m.factor.compute(m.covariance);
  if (m.factor.info() != Eigen::Success)
    raise(ErrorCode::NumericalFailure,
          "covariance is not positive definite; increase the regularization");
  return m;
}

double score(const UserModel& model, const FeatureVector& v) {
  if (v.values.size() != model.mean.size())
    raise(ErrorCode::DimensionMismatch, "feature vector dimension does not match the model");
  Eigen::VectorXd r = v.values - model.mean;
  // r' C^-1 r = ||L^-1 r||^2 for C = L L'.
  return model.factor.matrixL().solve(r).squaredNorm();
}

UserModel calibrate_threshold(UserModel model, const std::vector<FeatureVector>& train_vectors,
                              double quantile, double slack) {
  if (train_vectors.empty()) raise(ErrorCode::EmptyTraining, "no training vectors for calibration");
  if (!(quantile > 0.0) || quantile > 1.0)
    raise(ErrorCode::ConfigError, "quantile must lie in (0, 1]");
  if (slack <= 0.0) raise(ErrorCode::ConfigError, "threshold slack must be positive");

  std::vector<double> d(train_vectors.size());
  for (std::size_t i = 0; i < train_vectors.size(); ++i) d[i] = score(model, train_vectors[i]);
  std::sort(d.begin(), d.end());

  // "higher" quantile rule: smallest order statistic covering the fraction.
  // The epsilon absorbs q*(n-1) landing a hair above an integer.
  const double pos = quantile * static_cast<double>(d.size() - 1);
  auto idx = static_cast<std::size_t>(std::ceil(pos - 1e-9));
  idx = std::min(idx, d.size() - 1);
  model.threshold = d[idx] * slack;
  return model;
}

Decision verify(const UserModel& model, const FeatureVector& v) {
  if (!model.threshold.has_value())
    raise(ErrorCode::ThresholdUnset, "model has no calibrated threshold");
  Decision dec;
  dec.distance = score(model, v);
  dec.threshold = *model.threshold;
  dec.margin = dec.distance - dec.threshold;
  dec.accepted = dec.distance <= dec.threshold;
  return dec;
}

}  // namespace sigverify
