#include "sigverify/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "sigverify/error.hpp"

namespace sigverify {

namespace {

struct Probe {
  double f = 0.0;
  double slope = 0.0;  // directional derivative g·d
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Evaluates the objective along x0 + a*d. Non-finite values are kept as-is;
// callers treat them as "too far" and shrink the step.
Probe eval_at(const Objective& fn, const Eigen::VectorXd& x0, const Eigen::VectorXd& d, double a) {
  Probe p;
  p.x = x0 + a * d;
  p.g.resize(x0.size());
  p.f = fn(p.x, &p.g);
  p.slope = std::isfinite(p.f) ? p.g.dot(d) : std::numeric_limits<double>::quiet_NaN();
  return p;
}

// Strong-Wolfe line search, bracket + bisection zoom. Returns true and fills
// `out` when an acceptable step exists within the evaluation budget.
bool wolfe_search(const Objective& fn, const Eigen::VectorXd& x0, double f0,
                  const Eigen::VectorXd& d, double slope0, double a_init,
                  const LbfgsOptions& opts, Probe* out) {
  const double c1 = opts.c1, c2 = opts.c2;
  auto armijo_ok = [&](double a, double f) { return f <= f0 + c1 * a * slope0; };

  double a_lo = 0.0, f_lo = f0, slope_lo = slope0;
  Probe lo_probe;  // valid only once a_lo > 0
  double a_prev = 0.0, f_prev = f0;
  double a = a_init;
  bool bracketed = false;
  double a_hi = 0.0, f_hi = 0.0;

  for (int it = 0; it < opts.max_line_search && !bracketed; ++it) {
    Probe p = eval_at(fn, x0, d, a);
    if (!std::isfinite(p.f) || !armijo_ok(a, p.f) || (it > 0 && p.f >= f_prev)) {
      a_hi = a;
      f_hi = p.f;
      a_lo = a_prev;
      f_lo = f_prev;
      bracketed = true;
      break;
    }
    if (std::abs(p.slope) <= -c2 * slope0) {
      *out = std::move(p);
      return true;
    }
    if (p.slope >= 0.0) {
      a_hi = a_prev;
      f_hi = f_prev;
      a_lo = a;
      f_lo = p.f;
      slope_lo = p.slope;
      lo_probe = std::move(p);
      bracketed = true;
      break;
    }
    a_prev = a;
    f_prev = p.f;
    lo_probe = std::move(p);
    a *= 2.0;
  }
  if (!bracketed) return false;

  // slope_lo of the a_lo endpoint; when a_lo == 0 this is slope0.
  if (a_lo == 0.0) slope_lo = slope0;
  (void)f_hi;

  for (int it = 0; it < opts.max_line_search; ++it) {
    const double aj = 0.5 * (a_lo + a_hi);
    if (aj == a_lo || aj == a_hi) break;  // interval numerically collapsed
    Probe p = eval_at(fn, x0, d, aj);
    if (!std::isfinite(p.f) || !armijo_ok(aj, p.f) || p.f >= f_lo) {
      a_hi = aj;
    } else {
      if (std::abs(p.slope) <= -c2 * slope0) {
        *out = std::move(p);
        return true;
      }
      if (p.slope * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
      a_lo = aj;
      f_lo = p.f;
      slope_lo = p.slope;
      lo_probe = std::move(p);
    }
  }
  (void)slope_lo;
  // Fall back to the best sufficient-decrease point seen, if any. It violates
  // only the curvature condition, which still guarantees descent.
  if (a_lo > 0.0 && lo_probe.x.size() > 0 && std::isfinite(f_lo) && armijo_ok(a_lo, f_lo)) {
    *out = std::move(lo_probe);
    return true;
  }
  return false;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& fn, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts) {
  if (opts.history < 1 || opts.max_iterations < 1)
    raise(ErrorCode::ConfigError, "lbfgs history and iteration cap must be >= 1");

  LbfgsResult res;
  res.x = x0;
  Eigen::VectorXd g(x0.size());
  res.f = fn(res.x, &g);
  if (!std::isfinite(res.f))
    raise(ErrorCode::NonFinite, "objective is not finite at the starting point");
  res.cost_trace.push_back(res.f);
  res.grad_norm = g.norm();

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (res.grad_norm < opts.grad_tol * std::max(1.0, res.x.norm())) {
      res.status = LbfgsStatus::Converged;
      return res;
    }

    // Two-loop recursion for d = -H g.
    Eigen::VectorXd q = g;
    const int h = static_cast<int>(s_hist.size());
    std::vector<double> alpha(h);
    for (int i = h - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (h > 0) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < h; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += s_hist[i] * (alpha[i] - beta);
    }
    Eigen::VectorXd d = -q;

    double slope0 = g.dot(d);
    if (!(slope0 < 0.0)) {
      // Stale curvature can make d non-descending; restart from steepest descent.
      d = -g;
      slope0 = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    const double a_init = (iter == 0 && h == 0) ? 1.0 / std::max(1.0, res.grad_norm) : 1.0;
    Probe accepted;
    if (!wolfe_search(fn, res.x, res.f, d, slope0, a_init, opts, &accepted)) {
      res.status = LbfgsStatus::LineSearchFailed;
      return res;
    }

    Eigen::VectorXd s = accepted.x - res.x;
    Eigen::VectorXd y = accepted.g - g;
    res.x = std::move(accepted.x);
    res.f = accepted.f;
    g = std::move(accepted.g);
    res.grad_norm = g.norm();
    res.iterations = iter + 1;
    res.cost_trace.push_back(res.f);

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  res.status = res.grad_norm < opts.grad_tol * std::max(1.0, res.x.norm())
                   ? LbfgsStatus::Converged
                   : LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace sigverify
