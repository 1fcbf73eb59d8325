#include "sigverify/autoencoder.hpp"

#include <cmath>

#include "sigverify/error.hpp"
#include "sigverify/rng.hpp"

namespace sigverify {

namespace {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

// Same series as kl_divergence but returns inf on saturated rho_hat instead of
// throwing, so the cost path can report NonFinite uniformly.
inline double kl_term(double rho, double rho_hat) {
  return rho * std::log(rho / rho_hat) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_hat));
}

}  // namespace

double kl_divergence(double rho, double rho_hat) {
  if (!(rho > 0.0 && rho < 1.0))
    raise(ErrorCode::DomainError, "kl_divergence: rho must lie in (0, 1)");
  if (!(rho_hat > 0.0 && rho_hat < 1.0))
    raise(ErrorCode::DomainError, "kl_divergence: rho_hat must lie in (0, 1)");
  if (rho == rho_hat) return 0.0;
  return kl_term(rho, rho_hat);
}

AutoencoderParams init_params(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim <= 0 || hidden_dim <= 0)
    raise(ErrorCode::ConfigError, "autoencoder dimensions must be positive");
  const double r = std::sqrt(6.0 / (input_dim + hidden_dim + 1.0));
  std::mt19937_64 gen(seed);
  AutoencoderParams p;
  p.W1.resize(hidden_dim, input_dim);
  p.W2.resize(input_dim, hidden_dim);
  // Column-major fill, W1 before W2, so the stream of draws is well defined.
  for (Eigen::Index c = 0; c < p.W1.cols(); ++c)
    for (Eigen::Index rI = 0; rI < p.W1.rows(); ++rI)
      p.W1(rI, c) = uniform_range(gen, -r, r);
  for (Eigen::Index c = 0; c < p.W2.cols(); ++c)
    for (Eigen::Index rI = 0; rI < p.W2.rows(); ++rI)
      p.W2(rI, c) = uniform_range(gen, -r, r);
  p.b1 = Eigen::VectorXd::Zero(hidden_dim);
  p.b2 = Eigen::VectorXd::Zero(input_dim);
  return p;
}

Eigen::VectorXd pack_params(const AutoencoderParams& p) {
  const Eigen::Index h = p.W1.rows(), k = p.W1.cols();
  Eigen::VectorXd theta(h * k + h + k * h + k);
  Eigen::Index off = 0;
  theta.segment(off, h * k) = Eigen::Map<const Eigen::VectorXd>(p.W1.data(), h * k);
  off += h * k;
  theta.segment(off, h) = p.b1;
  off += h;
  theta.segment(off, k * h) = Eigen::Map<const Eigen::VectorXd>(p.W2.data(), k * h);
  off += k * h;
  theta.segment(off, k) = p.b2;
  return theta;
}

AutoencoderParams unpack_params(const Eigen::VectorXd& theta, int input_dim, int hidden_dim) {
  const Eigen::Index h = hidden_dim, k = input_dim;
  if (theta.size() != h * k + h + k * h + k)
    raise(ErrorCode::DimensionMismatch, "packed parameter vector has wrong length");
  AutoencoderParams p;
  Eigen::Index off = 0;
  p.W1 = Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, h, k);
  off += h * k;
  p.b1 = theta.segment(off, h);
  off += h;
  p.W2 = Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, k, h);
  off += k * h;
  p.b2 = theta.segment(off, k);
  return p;
}

Eigen::MatrixXd encode(const AutoencoderParams& p, const Eigen::MatrixXd& X) {
  if (X.rows() != p.W1.cols())
    raise(ErrorCode::DimensionMismatch, "encode: input dimension mismatch");
  Eigen::MatrixXd Z1 = (p.W1 * X).colwise() + p.b1;
  return sigmoid(Z1.array()).matrix();
}

double sparse_cost_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, int hidden_dim,
                        const AutoencoderHyperparams& hp, Eigen::VectorXd* grad,
                        SparsityStats* stats) {
  const Eigen::Index k = X.rows();
  const Eigen::Index m = X.cols();
  if (m == 0) raise(ErrorCode::TooFewSamples, "cost needs at least one sample");
  if (!(hp.rho > 0.0 && hp.rho < 1.0))
    raise(ErrorCode::ConfigError, "rho must lie in (0, 1)");
  if (hp.beta < 0.0 || hp.lambda < 0.0)
    raise(ErrorCode::ConfigError, "beta and lambda must be >= 0");
  AutoencoderParams p = unpack_params(theta, static_cast<int>(k), hidden_dim);

  Eigen::MatrixXd Z1 = (p.W1 * X).colwise() + p.b1;
  Eigen::MatrixXd A1 = sigmoid(Z1.array()).matrix();  // h x m
  Eigen::MatrixXd Y = (p.W2 * A1).colwise() + p.b2;   // k x m
  Eigen::MatrixXd R = Y - X;

  const double inv_m = 1.0 / static_cast<double>(m);
  double cost = R.squaredNorm() * inv_m +
                hp.lambda * (p.W1.squaredNorm() + p.W2.squaredNorm());

  Eigen::VectorXd rho_hat;
  if (hp.beta > 0.0 || stats != nullptr) {
    rho_hat = hp.squared_activation ? (A1.array().square().matrix().rowwise().sum() * inv_m).eval()
                                    : (A1.rowwise().sum() * inv_m).eval();
  }
  if (hp.beta > 0.0)
    for (Eigen::Index j = 0; j < rho_hat.size(); ++j) cost += hp.beta * kl_term(hp.rho, rho_hat(j));
  if (stats != nullptr) stats->rho_hat = rho_hat;
  if (!std::isfinite(cost)) raise(ErrorCode::NonFinite, "autoencoder cost is not finite");

  if (grad != nullptr) {
    Eigen::MatrixXd D2 = (2.0 * inv_m) * R;  // k x m
    Eigen::MatrixXd gW2 = D2 * A1.transpose() + 2.0 * hp.lambda * p.W2;
    Eigen::VectorXd gb2 = D2.rowwise().sum();

    Eigen::MatrixXd S = p.W2.transpose() * D2;  // h x m
    if (hp.beta > 0.0) {
      Eigen::VectorXd klg =
          hp.beta * (-hp.rho / rho_hat.array() + (1.0 - hp.rho) / (1.0 - rho_hat.array()));
      if (hp.squared_activation) {
        // d rho_hat_j / d a_ji = 2 a_ji / m
        S.array() += (klg * inv_m).replicate(1, m).array() * 2.0 * A1.array();
      } else {
        S.colwise() += klg * inv_m;
      }
    }
    Eigen::MatrixXd D1 = S.array() * A1.array() * (1.0 - A1.array());
    Eigen::MatrixXd gW1 = D1 * X.transpose() + 2.0 * hp.lambda * p.W1;
    Eigen::VectorXd gb1 = D1.rowwise().sum();

    AutoencoderParams g;
    g.W1 = std::move(gW1);
    g.b1 = std::move(gb1);
    g.W2 = std::move(gW2);
    g.b2 = std::move(gb2);
    *grad = pack_params(g);
    if (!grad->allFinite()) raise(ErrorCode::NonFinite, "autoencoder gradient is not finite");
  }
  return cost;
}

double check_gradient(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, int hidden_dim,
                      const AutoencoderHyperparams& hp, double step) {
  Eigen::VectorXd analytic;
  sparse_cost_grad(theta, X, hidden_dim, hp, &analytic);
  // Norm-based disagreement: a per-component quotient would only measure
  // difference-quotient roundoff on components whose gradient is tiny
  // relative to the cost scale, while any systematic error in a term moves
  // the norm far above the difference floor.
  Eigen::VectorXd numeric(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + step;
    const double fp = sparse_cost_grad(probe, X, hidden_dim, hp, nullptr);
    probe(i) = theta(i) - step;
    const double fm = sparse_cost_grad(probe, X, hidden_dim, hp, nullptr);
    probe(i) = theta(i);
    numeric(i) = (fp - fm) / (2.0 * step);
  }
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / denom;
}

}  // namespace sigverify
