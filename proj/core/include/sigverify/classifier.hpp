#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <string>
#include <vector>

#include "sigverify/features.hpp"

namespace sigverify {

/// Per-user one-class Gaussian. The regularized covariance is kept as a
/// Cholesky factorization so distances are computed by triangular solves.
struct UserModel {
  std::string user_id;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // after ridge regularization
  Eigen::LLT<Eigen::MatrixXd> factor;
  double reg = 0.0;
  std::optional<double> threshold;
  int train_count = 0;

  int dim() const { return static_cast<int>(mean.size()); }
};

struct Decision {
  bool accepted = false;
  double distance = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  // distance - threshold
};

/// Sample mean and covariance with a scale-relative ridge:
/// cov + reg * (trace(cov)/D) * I, or reg * I when the scatter is zero.
/// The threshold is left unset.
UserModel fit_user_model(const std::vector<FeatureVector>& vectors, double reg,
                         const std::string& user_id = {});

/// Squared Mahalanobis distance of v from the model mean.
double score(const UserModel& model, const FeatureVector& v);

/// Threshold = empirical quantile ("higher" rule) of training distances,
/// scaled by slack. quantile = 1, slack >= 1 accepts every training vector.
UserModel calibrate_threshold(UserModel model, const std::vector<FeatureVector>& train_vectors,
                              double quantile, double slack = 1.5);

/// Boundary rule: accepted exactly when distance <= threshold.
Decision verify(const UserModel& model, const FeatureVector& v);

}  // namespace sigverify
