#pragma once

#include <string>
#include <vector>

namespace sigverify {

/// Distances for one user's test attempts. Genuine attempts should score low.
struct ScorePools {
  std::string user_id;
  std::vector<double> genuine;
  std::vector<double> forgery;
};

struct RocPoint {
  double far = 0.0;  // forgeries accepted / forgery count
  double frr = 0.0;  // genuine rejected / genuine count
  double threshold = 0.0;
};

/// Staircase ordered by decreasing threshold, with (1,0,+inf) and (0,1,-inf)
/// sentinels. accepted_* keep the raw counts behind each point so AUC can be
/// computed without intermediate rounding.
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<long long> accepted_forgery;  // per point
  std::vector<long long> accepted_genuine;
  long long n_forgery = 0;
  long long n_genuine = 0;
};

/// Sweep accept-iff-distance<=threshold over all distinct scores.
RocCurve roc_curve(const ScorePools& pools);

/// Equal-error rate: linear interpolation where far - frr changes sign.
double eer(const RocCurve& curve);

/// Trapezoidal area under (far, 1-frr); equals the tie-aware Mann-Whitney
/// statistic exactly because the sum runs over integer counts.
double auc(const RocCurve& curve);

}  // namespace sigverify
