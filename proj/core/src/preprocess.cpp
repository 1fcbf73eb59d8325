#include "sigverify/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "sigverify/error.hpp"

namespace sigverify {

SignatureStatistics compute_statistics(const RawSignature& sig) {
  const auto& pts = sig.points;
  if (pts.size() < 2) raise(ErrorCode::DegenerateGeometry, "need at least 2 points");
  double n = static_cast<double>(pts.size());
  double mx = 0, my = 0;
  for (const auto& p : pts) { mx += p.x; my += p.y; }
  mx /= n;
  my /= n;
  SignatureStatistics st;
  for (const auto& p : pts) {
    double dx = p.x - mx, dy = p.y - my;
    st.sx2 += dx * dx;
    st.sy2 += dy * dy;
    st.cov_xy += dx * dy;
  }
  st.sx2 /= n;
  st.sy2 /= n;
  st.cov_xy /= n;
  if (st.sx2 == 0.0 && st.sy2 == 0.0)
    raise(ErrorCode::DegenerateGeometry, "all points coincide");

  if (st.cov_xy == 0.0) {
    st.theta = st.sx2 >= st.sy2 ? 0.0 : 1.5707963267948966;
  } else {
    double d = st.sy2 - st.sx2;
    st.theta = std::atan((d + std::sqrt(d * d + 4.0 * st.cov_xy * st.cov_xy)) / (2.0 * st.cov_xy));
  }
  return st;
}

RawSignature rotate(const RawSignature& sig, double theta) {
  double n = static_cast<double>(sig.points.size());
  double cx = 0, cy = 0;
  for (const auto& p : sig.points) { cx += p.x; cy += p.y; }
  cx /= n;
  cy /= n;
  double c = std::cos(theta), s = std::sin(theta);
  RawSignature out = sig;
  for (auto& p : out.points) {
    double dx = p.x - cx, dy = p.y - cy;
    // rotation by -theta
    p.x = cx + c * dx + s * dy;
    p.y = cy - s * dx + c * dy;
  }
  return out;
}

namespace {

/// Second derivatives of the natural cubic spline through y at unit-spaced
/// knots (Thomas algorithm; M[0] = M[n-1] = 0).
std::vector<double> spline_second_derivs(const std::vector<double>& y) {
  std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> cp(n, 0.0), dp(n, 0.0);
  auto rhs = [&](std::size_t i) { return 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]); };
  cp[1] = 1.0 / 4.0;
  dp[1] = rhs(1) / 4.0;
  for (std::size_t i = 2; i + 1 < n; ++i) {
    double denom = 4.0 - cp[i - 1];
    cp[i] = 1.0 / denom;
    dp[i] = (rhs(i) - dp[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = dp[i] - cp[i] * m[i + 1];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const std::vector<double>& y, const std::vector<double>& m, double u) {
  std::size_t n = y.size();
  std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), n - 2);
  double s = u - static_cast<double>(i);
  double a = 1.0 - s;
  return a * y[i] + s * y[i + 1] +
         ((a * a * a - a) * m[i] + (s * s * s - s) * m[i + 1]) / 6.0;
}

double lerp_at(const std::vector<double>& y, double u) {
  std::size_t n = y.size();
  std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), n - 2);
  double s = u - static_cast<double>(i);
  return (1.0 - s) * y[i] + s * y[i + 1];
}

}  // namespace

RawSignature smooth(const RawSignature& sig, double factor) {
  if (!(factor >= 1.0)) raise(ErrorCode::DomainError, "smooth factor must be >= 1");
  RawSignature out = sig;
  out.points.clear();

  std::size_t i = 0;
  const auto& pts = sig.points;
  while (i < pts.size()) {
    if (!pts[i].pen_down) {
      out.points.push_back(pts[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < pts.size() && pts[j].pen_down) ++j;
    std::size_t len = j - i;
    if (len < 4) {
      for (std::size_t k = i; k < j; ++k) out.points.push_back(pts[k]);
    } else {
      std::vector<double> xs(len), ys(len), ts(len), ps(len);
      for (std::size_t k = 0; k < len; ++k) {
        xs[k] = pts[i + k].x;
        ys[k] = pts[i + k].y;
        ts[k] = pts[i + k].t;
        ps[k] = pts[i + k].pressure;
      }
      auto mx = spline_second_derivs(xs);
      auto my = spline_second_derivs(ys);
      std::size_t m_out = static_cast<std::size_t>(std::llround(factor * static_cast<double>(len)));
      for (std::size_t k = 0; k < m_out; ++k) {
        double u = static_cast<double>(k) * static_cast<double>(len - 1) / static_cast<double>(m_out - 1);
        SignaturePoint p;
        p.x = spline_eval(xs, mx, u);
        p.y = spline_eval(ys, my, u);
        p.t = lerp_at(ts, u);
        p.pressure = lerp_at(ps, u);
        p.pen_down = true;
        out.points.push_back(p);
      }
    }
    i = j;
  }
  return out;
}

NormalizedSignature normalize(const RawSignature& sig) {
  const auto& pts = sig.points;
  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  double min_t = pts[0].t, max_t = pts[0].t, max_p = 0.0;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
    min_t = std::min(min_t, p.t);
    max_t = std::max(max_t, p.t);
    max_p = std::max(max_p, p.pressure);
  }
  if (max_x == min_x || max_y == min_y)
    raise(ErrorCode::DegenerateExtent, "constant x or y coordinate");

  NormalizedSignature out;
  out.points.reserve(pts.size());
  for (const auto& p : pts) {
    NormalizedPoint q;
    q.x = (p.x - min_x) / (max_x - min_x) * 100.0;
    q.y = (p.y - min_y) / (max_y - min_y) * 100.0;
    q.t = max_t > min_t ? (p.t - min_t) / (max_t - min_t) : 0.0;
    q.pressure = max_p > 0.0 ? p.pressure / max_p : (p.pen_down ? 1.0 : 0.0);
    q.pen_down = p.pen_down;
    out.points.push_back(q);
  }
  return out;
}

NormalizedSignature normalize_passthrough(const RawSignature& sig) {
  const auto& pts = sig.points;
  double min_t = pts[0].t, max_t = pts[0].t, max_p = 0.0;
  for (const auto& p : pts) {
    min_t = std::min(min_t, p.t);
    max_t = std::max(max_t, p.t);
    max_p = std::max(max_p, p.pressure);
  }
  NormalizedSignature out;
  out.points.reserve(pts.size());
  for (const auto& p : pts) {
    NormalizedPoint q;
    q.x = p.x;
    q.y = p.y;
    q.t = max_t > min_t ? (p.t - min_t) / (max_t - min_t) : 0.0;
    q.pressure = max_p > 0.0 ? p.pressure / max_p : (p.pen_down ? 1.0 : 0.0);
    q.pen_down = p.pen_down;
    out.points.push_back(q);
  }
  return out;
}

SignatureImage rasterize(const NormalizedSignature& sig, int width, int height) {
  if (width < 8 || height < 8)
    raise(ErrorCode::ConfigError, "raster dimensions must be >= 8");

  SignatureImage img;
  img.width = width;
  img.height = height;
  img.pressure = Eigen::MatrixXd::Zero(height, width);
  img.time = Eigen::MatrixXd::Zero(height, width);

  // [0,100]^2 onto the centered largest square (letterbox)
  double scale = static_cast<double>(std::min(width, height) - 1) / 100.0;
  double off_c = (static_cast<double>(width - 1) - scale * 100.0) / 2.0;
  double off_r = (static_cast<double>(height - 1) - scale * 100.0) / 2.0;

  auto col_of = [&](double x) { return std::llround(off_c + scale * x); };
  auto row_of = [&](double y) { return std::llround(off_r + scale * y); };
  auto paint = [&](long long r, long long c, double p, double t) {
    if (r < 0 || r >= height || c < 0 || c >= width) return;  // clip (passthrough mode)
    img.pressure(r, c) = std::max(img.pressure(r, c), p);
    img.time(r, c) = t;
  };

  const auto& pts = sig.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].pen_down) continue;
    long long c1 = col_of(pts[i].x), r1 = row_of(pts[i].y);
    if (i == 0 || !pts[i - 1].pen_down) {
      paint(r1, c1, pts[i].pressure, pts[i].t);
      continue;
    }
    long long c0 = col_of(pts[i - 1].x), r0 = row_of(pts[i - 1].y);
    long long steps = std::max(std::llabs(c1 - c0), std::llabs(r1 - r0));
    if (steps == 0) {
      paint(r1, c1, std::max(pts[i - 1].pressure, pts[i].pressure), pts[i].t);
      continue;
    }
    for (long long k = 0; k <= steps; ++k) {
      double a = static_cast<double>(k) / static_cast<double>(steps);
      long long c = std::llround(static_cast<double>(c0) + a * static_cast<double>(c1 - c0));
      long long r = std::llround(static_cast<double>(r0) + a * static_cast<double>(r1 - r0));
      double p = (1.0 - a) * pts[i - 1].pressure + a * pts[i].pressure;
      double t = (1.0 - a) * pts[i - 1].t + a * pts[i].t;
      paint(r, c, p, t);
    }
  }
  return img;
}

SignatureImage preprocess_pipeline(const RawSignature& sig, const PreprocessConfig& config) {
  RawSignature cur = sig;
  if (config.smooth_enabled) cur = smooth(cur, config.smooth_factor);
  if (config.rotate_enabled) cur = rotate(cur, compute_statistics(cur).theta);
  NormalizedSignature norm =
      config.normalize_enabled ? normalize(cur) : normalize_passthrough(cur);
  return rasterize(norm, config.raster_width, config.raster_height);
}

}  // namespace sigverify
