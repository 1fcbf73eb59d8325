#include "sigverify/whitening.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>

#include "sigverify/error.hpp"

namespace sigverify {

std::string to_string(WhitenMode mode) { return mode == WhitenMode::pca ? "pca" : "zca"; }

WhitenMode whiten_mode_from_string(const std::string& s) {
  if (s == "pca") return WhitenMode::pca;
  if (s == "zca") return WhitenMode::zca;
  raise(ErrorCode::ConfigError, "unknown whitening mode '" + s + "'");
}

WhiteningTransform fit_whitening(const Eigen::MatrixXd& data, double epsilon,
                                 double variance_to_keep, WhitenMode mode) {
  const Eigen::Index m = data.rows();
  const Eigen::Index d = data.cols();
  if (m < 2) raise(ErrorCode::TooFewSamples, "whitening needs at least 2 samples");
  if (epsilon < 0.0) raise(ErrorCode::ConfigError, "whitening epsilon must be >= 0");
  if (!(variance_to_keep > 0.0) || variance_to_keep > 1.0)
    raise(ErrorCode::ConfigError, "variance_to_keep must lie in (0, 1]");
  if (m < d)
    std::cerr << "warning: fitting whitening with fewer samples (" << m << ") than dimensions ("
              << d << "); covariance is rank-deficient\n";

  WhiteningTransform w;
  w.epsilon = epsilon;
  w.mode = mode;
  w.mean = data.colwise().mean().transpose();

  Eigen::MatrixXd centered = data.rowwise() - w.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    raise(ErrorCode::NumericalFailure, "eigendecomposition of covariance failed");

  // Eigen returns ascending eigenvalues; flip to descending.
  Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  Eigen::MatrixXd V(d, d);
  for (Eigen::Index i = 0; i < d; ++i) V.col(i) = eig.eigenvectors().col(d - 1 - i);

  const double lambda_max = std::max(lambda(0), 0.0);
  const double cutoff = lambda_max * 1e-12;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (lambda(i) > cutoff) ++rank;
  if (rank == 0) raise(ErrorCode::NumericalFailure, "covariance has no positive eigenvalues");

  const double total = lambda.head(rank).sum();
  Eigen::Index k = rank;
  if (mode == WhitenMode::pca) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rank; ++i) {
      acc += lambda(i);
      if (acc / total >= variance_to_keep) {
        k = i + 1;
        break;
      }
    }
  }

  if (mode == WhitenMode::pca) {
    w.retained_k = static_cast<int>(k);
    w.variance_kept = lambda.head(k).sum() / total;
    w.basis.resize(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
      w.basis.row(i) = V.col(i).transpose() / std::sqrt(lambda(i) + epsilon);
  } else {
    // ZCA rotates back into input coordinates; null directions get zero scale
    // when epsilon is zero, making the map a square-root pseudo-inverse.
    w.retained_k = static_cast<int>(d);
    w.variance_kept = 1.0;
    Eigen::VectorXd inv_scale = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double denom = std::sqrt(std::max(lambda(i), 0.0) + epsilon);
      inv_scale(i) = denom > 0.0 ? 1.0 / denom : 0.0;
    }
    w.basis = V * inv_scale.asDiagonal() * V.transpose();
  }
  return w;
}

Eigen::VectorXd apply_whitening(const WhiteningTransform& w, const Eigen::VectorXd& x) {
  if (x.size() != w.mean.size())
    raise(ErrorCode::DimensionMismatch,
          "whitening expects dimension " + std::to_string(w.mean.size()) + ", got " +
              std::to_string(x.size()));
  return w.basis * (x - w.mean);
}

Eigen::MatrixXd apply_whitening(const WhiteningTransform& w, const Eigen::MatrixXd& X) {
  if (X.rows() != w.mean.size())
    raise(ErrorCode::DimensionMismatch,
          "whitening expects dimension " + std::to_string(w.mean.size()) + ", got " +
              std::to_string(X.rows()));
  return w.basis * (X.colwise() - w.mean);
}

}  // namespace sigverify
