#pragma once

#include <functional>
#include <vector>

#include "sigverify/types.hpp"

namespace sigverify {

/// Objective callback: returns f(x) and, when grad is non-null, writes the
/// gradient. Returning +inf rejects a trial point during line search.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

enum class LbfgsStatus : std::uint8_t {
  Converged = 0,       // gradient norm fell below tolerance
  MaxIterations = 1,   // iteration cap reached
  LineSearchFailed = 2 // no acceptable step found; last iterate kept
};

struct LbfgsOptions {
  int max_iterations = 700;
  int history = 20;
  double grad_tol = 1e-8;   // stop when ||g|| < grad_tol * max(1, ||x||)
  double c1 = 1e-4;         // sufficient decrease
  double c2 = 0.9;          // curvature
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  /// f at x0 followed by f at each accepted iterate; non-increasing.
  std::vector<double> cost_trace;
};

LbfgsResult lbfgs_minimize(const Objective& fn, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts);

}  // namespace sigverify
