#pragma once

#include <cstdint>

#include "sigverify/types.hpp"

namespace sigverify {

/// Untied encoder/decoder weights. Encoder is sigmoid(W1 x + b1) with h units,
/// decoder is the linear map W2 a + b2 back to k inputs.
struct AutoencoderParams {
  Eigen::MatrixXd W1;  // h x k
  Eigen::VectorXd b1;  // h
  Eigen::MatrixXd W2;  // k x h
  Eigen::VectorXd b2;  // k

  int input_dim() const { return static_cast<int>(W1.cols()); }
  int hidden_dim() const { return static_cast<int>(W1.rows()); }
};

struct AutoencoderHyperparams {
  double rho = 0.05;
  double beta = 3.0;
  double lambda = 3e-3;
  int iterations = 700;
  int lbfgs_history = 20;
  std::uint64_t seed = 0;
  /// When true the sparsity statistic for unit j is the mean of a_j^2 across
  /// the batch instead of the mean activation.
  bool squared_activation = false;
};

/// Per-unit average hidden activation over a batch.
struct SparsityStats {
  Eigen::VectorXd rho_hat;  // h
};

/// KL divergence between Bernoulli(rho) and Bernoulli(rho_hat).
/// Raises DomainError when either argument leaves the open interval (0, 1).
double kl_divergence(double rho, double rho_hat);

/// Glorot-style uniform init in [-r, r] with r = sqrt(6 / (k + h + 1));
/// biases start at zero. Deterministic for a fixed seed.
AutoencoderParams init_params(int input_dim, int hidden_dim, std::uint64_t seed);

Eigen::VectorXd pack_params(const AutoencoderParams& p);
AutoencoderParams unpack_params(const Eigen::VectorXd& theta, int input_dim, int hidden_dim);

/// Reconstruction cost plus L2 weight decay plus the sparsity penalty, with
/// its analytic gradient in packed layout. X holds one sample per column.
/// grad and stats may each be null when not needed.
double sparse_cost_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, int hidden_dim,
                        const AutoencoderHyperparams& hp, Eigen::VectorXd* grad,
                        SparsityStats* stats = nullptr);

/// Hidden activations for a batch (columns of X), h x m.
Eigen::MatrixXd encode(const AutoencoderParams& p, const Eigen::MatrixXd& X);

/// Relative disagreement between the analytic gradient and a central finite
/// difference at theta: ||analytic - numeric|| over the larger of the two
/// norms.
double check_gradient(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, int hidden_dim,
                      const AutoencoderHyperparams& hp, double step = 1e-5);

}  // namespace sigverify
