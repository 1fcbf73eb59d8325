#include "sigverify/train.hpp"

#include <iostream>
#include <limits>

#include "sigverify/error.hpp"
#include "sigverify/lbfgs.hpp"

namespace sigverify {

FeatureBank train_features(const PatchSet& patches, int hidden_dim,
                           const AutoencoderHyperparams& hyper, const WhitenConfig& whiten) {
  if (hidden_dim < 1) raise(ErrorCode::ConfigError, "hidden_dim must be >= 1");
  if (hyper.iterations < 1) raise(ErrorCode::ConfigError, "iterations must be >= 1");
  if (patches.count() < 2) raise(ErrorCode::TooFewSamples, "training needs at least 2 patches");

  PatchSet zero_mean = patches.mean_removed ? patches : remove_dc(patches);

  FeatureBank bank;
  bank.hyper = hyper;
  bank.patch_h = patches.patch_h;
  bank.patch_w = patches.patch_w;
  bank.whitening =
      fit_whitening(zero_mean.patches, whiten.epsilon, whiten.variance_to_keep, whiten.mode);

  // Whitened batch, one sample per column.
  Eigen::MatrixXd X = apply_whitening(bank.whitening, Eigen::MatrixXd(zero_mean.patches.transpose()));
  const int k = static_cast<int>(X.rows());

  AutoencoderParams init = init_params(k, hidden_dim, hyper.seed);
  Eigen::VectorXd theta0 = pack_params(init);

  // Non-finite trial costs (saturation, overflow at long steps) become +inf so
  // the line search backs off instead of aborting the whole run.
  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) -> double {
    try {
      return sparse_cost_grad(theta, X, hidden_dim, hyper, grad);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFinite) return std::numeric_limits<double>::infinity();
      throw;
    }
  };

  LbfgsOptions opts;
  opts.max_iterations = hyper.iterations;
  opts.history = hyper.lbfgs_history;
  opts.grad_tol = 1e-8;
  LbfgsResult result = lbfgs_minimize(objective, theta0, opts);
  if (result.status == LbfgsStatus::LineSearchFailed)
    std::cerr << "warning: line search stalled after " << result.iterations
              << " iterations; keeping last iterate (cost " << result.f << ")\n";

  bank.params = unpack_params(result.x, k, hidden_dim);
  bank.training_cost_trace = std::move(result.cost_trace);
  return bank;
}

}  // namespace sigverify
