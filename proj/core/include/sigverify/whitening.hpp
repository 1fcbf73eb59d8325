#pragma once

#include <cstdint>
#include <string>

#include "sigverify/types.hpp"

namespace sigverify {

enum class WhitenMode : std::uint8_t { pca = 0, zca = 1 };

std::string to_string(WhitenMode mode);
WhitenMode whiten_mode_from_string(const std::string& s);

/// Decorrelating linear map fitted on training data. apply() computes
/// basis * (x - mean); for PCA the basis has retained_k rows, for ZCA it is
/// square (d x d).
struct WhiteningTransform {
  Eigen::VectorXd mean;   // d
  Eigen::MatrixXd basis;  // k x d
  double epsilon = 0.0;
  int retained_k = 0;
  double variance_kept = 1.0;
  WhitenMode mode = WhitenMode::pca;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(basis.rows()); }
};

/// Fit on rows of data (m x d). variance_to_keep in (0, 1] picks the smallest
/// eigenbasis prefix whose variance share reaches the target; ZCA always keeps
/// the full (rank-capped) basis. Eigenvalues below lambda_max * 1e-12 count as
/// zero so epsilon = 0 stays finite on rank-deficient data.
WhiteningTransform fit_whitening(const Eigen::MatrixXd& data, double epsilon,
                                 double variance_to_keep, WhitenMode mode);

Eigen::VectorXd apply_whitening(const WhiteningTransform& w, const Eigen::VectorXd& x);

/// Column-wise batch: each column of X is one vector.
Eigen::MatrixXd apply_whitening(const WhiteningTransform& w, const Eigen::MatrixXd& X);

}  // namespace sigverify
