#include "sigverify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigverify/error.hpp"

namespace sigverify {

RocCurve roc_curve(const ScorePools& pools) {
  if (pools.genuine.empty() || pools.forgery.empty())
    raise(ErrorCode::EmptyPool, "roc_curve needs nonempty genuine and forgery pools");
  for (double s : pools.genuine)
    if (!std::isfinite(s)) raise(ErrorCode::NonFinite, "non-finite genuine score");
  for (double s : pools.forgery)
    if (!std::isfinite(s)) raise(ErrorCode::NonFinite, "non-finite forgery score");

  std::vector<double> g = pools.genuine;
  std::vector<double> f = pools.forgery;
  std::sort(g.begin(), g.end());
  std::sort(f.begin(), f.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + f.size());
  std::merge(g.begin(), g.end(), f.begin(), f.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve curve;
  curve.n_genuine = static_cast<long long>(g.size());
  curve.n_forgery = static_cast<long long>(f.size());
  const double ng = static_cast<double>(g.size());
  const double nf = static_cast<double>(f.size());

  auto push = [&](long long fa, long long ga, double tau) {
    curve.points.push_back({static_cast<double>(fa) / nf, static_cast<double>(ng - ga) / ng, tau});
    curve.accepted_forgery.push_back(fa);
    curve.accepted_genuine.push_back(ga);
  };

  push(curve.n_forgery, curve.n_genuine, std::numeric_limits<double>::infinity());
  // Descending thresholds; accepted counts are "values <= tau" in the sorted pools.
  for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
    const double tau = *it;
    const long long fa = std::upper_bound(f.begin(), f.end(), tau) - f.begin();
    const long long ga = std::upper_bound(g.begin(), g.end(), tau) - g.begin();
    push(fa, ga, tau);
  }
  push(0, 0, -std::numeric_limits<double>::infinity());
  return curve;
}

double eer(const RocCurve& curve) {
  // far - frr runs from +1 at the first sentinel to -1 at the last; the EER
  // sits where the interpolated staircase crosses far == frr.
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const double d0 = curve.points[i].far - curve.points[i].frr;
    const double d1 = curve.points[i + 1].far - curve.points[i + 1].frr;
    if (d0 >= 0.0 && d1 <= 0.0) {
      if (d0 == d1) return curve.points[i].far;
      const double t = d0 / (d0 - d1);
      return curve.points[i].far + t * (curve.points[i + 1].far - curve.points[i].far);
    }
  }
  raise(ErrorCode::NumericalFailure, "roc curve has no far/frr crossing");
}

double auc(const RocCurve& curve) {
  // Integer cross terms keep the trapezoid exact: sum of
  // (fa_i - fa_{i+1}) * (ga_i + ga_{i+1}) over segments, one final division.
  long long acc = 0;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const long long dfa = curve.accepted_forgery[i] - curve.accepted_forgery[i + 1];
    const long long sga = curve.accepted_genuine[i] + curve.accepted_genuine[i + 1];
    acc += dfa * sga;
  }
  return static_cast<double>(acc) / (2.0 * static_cast<double>(curve.n_forgery) *
                                     static_cast<double>(curve.n_genuine));
}

}  // namespace sigverify
