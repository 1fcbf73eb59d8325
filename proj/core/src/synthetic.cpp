#include "sigverify/synthetic.hpp"

#include <cmath>
#include <fstream>

#include "sigverify/error.hpp"
#include "sigverify/rng.hpp"

namespace sigverify {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct StrokeParams {
  double cx, cy;        // stroke center
  double ax, ay;        // amplitudes
  int fx1, fx2, fy1, fy2;
  double p1, p2, p3, p4;  // phases
  double pressure_mid;
  double pressure_wiggle;
  int n_points;
};

}  // namespace

RawSignature generate_synthetic_signature(std::uint64_t seed, int user_template, double jitter) {
  if (!(jitter >= 0.0 && jitter <= 1.0))
    raise(ErrorCode::DomainError, "jitter must be in [0,1]");

  // Base geometry depends only on the template id.
  std::mt19937_64 trng(salted_seed(named_seed(0x5157u, "template"), static_cast<std::uint64_t>(user_template)));
  int n_strokes = 2 + static_cast<int>(uniform_index(trng, 3));
  std::vector<StrokeParams> strokes(n_strokes);
  double advance = 520.0 + uniform_range(trng, -60.0, 60.0);
  for (int s = 0; s < n_strokes; ++s) {
    auto& sp = strokes[s];
    sp.cx = 500.0 + s * advance + uniform_range(trng, -80.0, 80.0);
    sp.cy = 900.0 + uniform_range(trng, -180.0, 180.0);
    sp.ax = uniform_range(trng, 180.0, 420.0);
    sp.ay = uniform_range(trng, 150.0, 350.0);
    sp.fx1 = 1 + static_cast<int>(uniform_index(trng, 3));
    sp.fx2 = 2 + static_cast<int>(uniform_index(trng, 4));
    sp.fy1 = 1 + static_cast<int>(uniform_index(trng, 3));
    sp.fy2 = 2 + static_cast<int>(uniform_index(trng, 4));
    sp.p1 = uniform_range(trng, 0.0, kTwoPi);
    sp.p2 = uniform_range(trng, 0.0, kTwoPi);
    sp.p3 = uniform_range(trng, 0.0, kTwoPi);
    sp.p4 = uniform_range(trng, 0.0, kTwoPi);
    sp.pressure_mid = uniform_range(trng, 300.0, 500.0);
    sp.pressure_wiggle = uniform_range(trng, 0.1, 0.35);
    sp.n_points = 36 + static_cast<int>(uniform_index(trng, 12));
  }

  // Jitter noise stream; every draw is scaled by `jitter`, so jitter == 0
  // produces the bare template regardless of seed.
  std::mt19937_64 jrng(salted_seed(named_seed(seed, "jitter"), static_cast<std::uint64_t>(user_template)));
  double wobble_angle = jitter * 0.15 * normal(jrng);
  double wobble_scale = 1.0 + jitter * 0.25 * normal(jrng);

  struct FloatPoint {
    double x, y, pressure, dt;
    bool pen_down;
  };
  std::vector<FloatPoint> pts;
  for (int s = 0; s < n_strokes; ++s) {
    const auto& sp = strokes[s];
    if (s > 0) {
      // pen lifted while travelling to the next stroke
      double x0 = sp.cx + sp.ax * 0.7 * (std::cos(sp.p1) + 0.45 * std::cos(sp.p2));
      double y0 = sp.cy + sp.ay * 0.7 * (std::sin(sp.p3) + 0.45 * std::sin(sp.p4));
      pts.push_back({x0, y0, 0.0, 60.0, false});
    }
    for (int i = 0; i < sp.n_points; ++i) {
      double u = static_cast<double>(i) / (sp.n_points - 1);
      double x = sp.cx + sp.ax * 0.7 * (std::cos(kTwoPi * sp.fx1 * u + sp.p1) +
                                        0.45 * std::cos(kTwoPi * sp.fx2 * u + sp.p2));
      double y = sp.cy + sp.ay * 0.7 * (std::sin(kTwoPi * sp.fy1 * u + sp.p3) +
                                        0.45 * std::sin(kTwoPi * sp.fy2 * u + sp.p4));
      double pressure = sp.pressure_mid * (std::sin(3.14159265358979323846 * u) *
                                               (1.0 + sp.pressure_wiggle * std::sin(kTwoPi * 2 * u + sp.p1)) +
                                           0.15);
      pts.push_back({x, y, pressure, 10.0, true});
    }
  }

  // centroid of the base curve, for the wobble pivot
  double cx = 0, cy = 0;
  for (const auto& p : pts) { cx += p.x; cy += p.y; }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());

  double ca = std::cos(wobble_angle), sa = std::sin(wobble_angle);
  RawSignature sig;
  sig.points.reserve(pts.size());
  double t = 0.0;
  for (auto& p : pts) {
    double dx = (p.x - cx) * wobble_scale, dy = (p.y - cy) * wobble_scale;
    double x = cx + ca * dx - sa * dy + jitter * 60.0 * normal(jrng);
    double y = cy + sa * dx + ca * dy + jitter * 60.0 * normal(jrng);
    double pressure = p.pen_down ? std::max(1.0, p.pressure + jitter * 80.0 * normal(jrng)) : 0.0;
    double dt = p.dt * std::max(0.2, 1.0 + jitter * 0.5 * normal(jrng));
    t += dt;
    SignaturePoint out;
    out.x = std::round(x);
    out.y = std::round(y);
    out.t = std::round(t);
    out.pen_down = p.pen_down;
    out.pressure = std::round(std::min(pressure, 1023.0));
    sig.points.push_back(out);
  }
  // rounding can only shrink gaps, never reorder, but keep the invariant airtight
  for (std::size_t i = 1; i < sig.points.size(); ++i)
    sig.points[i].t = std::max(sig.points[i].t, sig.points[i - 1].t);

  sig.user_id = "template" + std::to_string(user_template);
  return sig;
}

DatasetLayout write_testkit(const std::filesystem::path& root, int n_users, int n_genuine,
                            int n_forgery, double jitter, std::uint64_t seed) {
  std::filesystem::create_directories(root);
  for (int u = 1; u <= n_users; ++u) {
    for (int s = 1; s <= n_genuine + n_forgery; ++s) {
      int tmpl = s <= n_genuine ? u : 1000 + u;
      std::uint64_t sig_seed = salted_seed(seed, static_cast<std::uint64_t>(u) * 100000u + s);
      RawSignature sig = generate_synthetic_signature(sig_seed, tmpl, jitter);
      auto path = root / ("U" + std::to_string(u) + "S" + std::to_string(s) + ".TXT");
      std::ofstream out(path, std::ios::binary);
      if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
      out << serialize_signature_svc2004(sig);
    }
  }
  DatasetLayout layout;
  layout.preset = LayoutPreset::svc2004;
  layout.filename_rule = "U{user}S{sample}.*";
  layout.genuine_per_user = n_genuine;
  layout.forgery_per_user = n_forgery;
  return layout;
}

}  // namespace sigverify
