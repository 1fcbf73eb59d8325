#include "sigverify/config.hpp"

#include <charconv>
#include <sstream>

#include "sigverify/error.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/whitening.hpp"

namespace sigverify {

namespace {

// Shortest round-trippable decimal form.
std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

void expect(bool ok, const std::string& what) {
  if (!ok) raise(ErrorCode::ConfigError, what);
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    raise(ErrorCode::ConfigError, "bad value for '" + key + "': '" + v + "'");
  return out;
}

bool truth(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  raise(ErrorCode::ConfigError, "bad value for '" + key + "': '" + v + "'");
}

}  // namespace

void RunConfig::validate() const {
  expect(raster_width >= 8 && raster_height >= 8, "raster dimensions must be >= 8");
  expect(smooth_factor >= 1.0, "smooth_factor must be >= 1");
  expect(patch_h >= 1 && patch_w >= 1, "patch dimensions must be >= 1");
  expect(patch_h <= raster_height && patch_w <= raster_width,
         "patch must fit inside the rasterized image");
  expect(n_patches >= 1, "n_patches must be >= 1");
  expect(hidden >= 1, "hidden must be >= 1");
  expect(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  expect(beta >= 0.0, "beta must be >= 0");
  expect(lambda >= 0.0, "lambda must be >= 0");
  expect(iters >= 1, "iters must be >= 1");
  expect(lbfgs_history >= 1, "lbfgs_history must be >= 1");
  expect(whiten_eps >= 0.0, "whiten_eps must be >= 0");
  expect(variance_keep > 0.0 && variance_keep <= 1.0, "variance_keep must lie in (0, 1]");
  whiten_mode_from_string(whiten_mode);
  expect(pool_rows >= 1 && pool_cols >= 1, "pool grid must be at least 1x1");
  expect(pool_rows <= raster_height - patch_h + 1 && pool_cols <= raster_width - patch_w + 1,
         "pool grid exceeds the convolved map size");
  expect(reg >= 0.0, "reg must be >= 0");
  expect(quantile > 0.0 && quantile <= 1.0, "quantile must lie in (0, 1]");
  expect(slack > 0.0, "slack must be > 0");
  forgery_kind_from_string(forgery_kind);
  expect(folds >= 1, "folds must be >= 1");
  expect(train_fraction > 0.0 && train_fraction <= 1.0, "train_fraction must lie in (0, 1]");
  expect(random_forgery_cap >= 1, "random_forgery_cap must be >= 1");
  expect(genuine_per_user >= 1, "genuine_per_user must be >= 1");
  expect(forgery_per_user >= 0, "forgery_per_user must be >= 0");
  if (layout_preset == "column_mapped")
    expect(!column_map.empty(), "column_mapped layout needs a column_map");
  else
    expect(layout_preset == "svc2004", "unknown layout_preset '" + layout_preset + "'");
}

std::map<std::string, std::string> RunConfig::snapshot() const {
  std::map<std::string, std::string> s;
  s["raster_width"] = std::to_string(raster_width);
  s["raster_height"] = std::to_string(raster_height);
  s["smooth"] = fmt(smooth);
  s["smooth_factor"] = fmt(smooth_factor);
  s["rotate"] = fmt(rotate);
  s["normalize"] = fmt(normalize);
  s["patch_h"] = std::to_string(patch_h);
  s["patch_w"] = std::to_string(patch_w);
  s["n_patches"] = std::to_string(n_patches);
  s["hidden"] = std::to_string(hidden);
  s["rho"] = fmt(rho);
  s["beta"] = fmt(beta);
  s["lambda"] = fmt(lambda);
  s["iters"] = std::to_string(iters);
  s["lbfgs_history"] = std::to_string(lbfgs_history);
  s["squared_rho_hat"] = fmt(squared_rho_hat);
  s["whiten_eps"] = fmt(whiten_eps);
  s["variance_keep"] = fmt(variance_keep);
  s["whiten_mode"] = whiten_mode;
  s["pool_rows"] = std::to_string(pool_rows);
  s["pool_cols"] = std::to_string(pool_cols);
  s["reg"] = fmt(reg);
  s["quantile"] = fmt(quantile);
  s["slack"] = fmt(slack);
  s["forgery_kind"] = forgery_kind;
  s["folds"] = std::to_string(folds);
  s["train_fraction"] = fmt(train_fraction);
  s["random_forgery_cap"] = std::to_string(random_forgery_cap);
  s["pooled"] = fmt(pooled);
  s["seed"] = std::to_string(seed);
  s["layout_preset"] = layout_preset;
  s["filename_rule"] = filename_rule;
  s["column_map"] = column_map;
  s["genuine_per_user"] = std::to_string(genuine_per_user);
  s["forgery_per_user"] = std::to_string(forgery_per_user);
  s["fail_fast"] = fmt(fail_fast);
  return s;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : snapshot()) out += k + "=" + v + "\n";
  return out;
}

void RunConfig::apply_text(const std::string& text, const std::set<std::string>& keep) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::ConfigError, "malformed config line '" + line + "'");
    const std::string k = line.substr(0, eq);
    const std::string v = line.substr(eq + 1);
    if (keep.count(k)) continue;
    if (k == "raster_width") raster_width = number<int>(k, v);
    else if (k == "raster_height") raster_height = number<int>(k, v);
    else if (k == "smooth") smooth = truth(k, v);
    else if (k == "smooth_factor") smooth_factor = number<double>(k, v);
    else if (k == "rotate") rotate = truth(k, v);
    else if (k == "normalize") normalize = truth(k, v);
    else if (k == "patch_h") patch_h = number<int>(k, v);
    else if (k == "patch_w") patch_w = number<int>(k, v);
    else if (k == "n_patches") n_patches = number<int>(k, v);
    else if (k == "hidden") hidden = number<int>(k, v);
    else if (k == "rho") rho = number<double>(k, v);
    else if (k == "beta") beta = number<double>(k, v);
    else if (k == "lambda") lambda = number<double>(k, v);
    else if (k == "iters") iters = number<int>(k, v);
    else if (k == "lbfgs_history") lbfgs_history = number<int>(k, v);
    else if (k == "squared_rho_hat") squared_rho_hat = truth(k, v);
    else if (k == "whiten_eps") whiten_eps = number<double>(k, v);
    else if (k == "variance_keep") variance_keep = number<double>(k, v);
    else if (k == "whiten_mode") whiten_mode = v;
    else if (k == "pool_rows") pool_rows = number<int>(k, v);
    else if (k == "pool_cols") pool_cols = number<int>(k, v);
    else if (k == "reg") reg = number<double>(k, v);
    else if (k == "quantile") quantile = number<double>(k, v);
    else if (k == "slack") slack = number<double>(k, v);
    else if (k == "forgery_kind") forgery_kind = v;
    else if (k == "folds") folds = number<int>(k, v);
    else if (k == "train_fraction") train_fraction = number<double>(k, v);
    else if (k == "random_forgery_cap") random_forgery_cap = number<int>(k, v);
    else if (k == "pooled") pooled = truth(k, v);
    else if (k == "seed") seed = number<std::uint64_t>(k, v);
    else if (k == "layout_preset") layout_preset = v;
    else if (k == "filename_rule") filename_rule = v;
    else if (k == "column_map") column_map = v;
    else if (k == "genuine_per_user") genuine_per_user = number<int>(k, v);
    else if (k == "forgery_per_user") forgery_per_user = number<int>(k, v);
    else if (k == "fail_fast") fail_fast = truth(k, v);
  }
}

PreprocessConfig RunConfig::preprocess_config() const {
  PreprocessConfig p;
  p.smooth_enabled = smooth;
  p.smooth_factor = smooth_factor;
  p.rotate_enabled = rotate;
  p.normalize_enabled = normalize;
  p.raster_width = raster_width;
  p.raster_height = raster_height;
  return p;
}

AutoencoderHyperparams RunConfig::hyper_config() const {
  AutoencoderHyperparams h;
  h.rho = rho;
  h.beta = beta;
  h.lambda = lambda;
  h.iterations = iters;
  h.lbfgs_history = lbfgs_history;
  h.seed = named_seed(seed, "init");
  h.squared_activation = squared_rho_hat;
  return h;
}

WhitenConfig RunConfig::whiten_config() const {
  WhitenConfig w;
  w.epsilon = whiten_eps;
  w.variance_to_keep = variance_keep;
  w.mode = whiten_mode_from_string(whiten_mode);
  return w;
}

ProtocolConfig RunConfig::protocol_config() const {
  ProtocolConfig p;
  p.preprocess = preprocess_config();
  p.pool_rows = pool_rows;
  p.pool_cols = pool_cols;
  p.reg = reg;
  p.forgery_kind = forgery_kind_from_string(forgery_kind);
  p.folds = folds;
  p.train_fraction = train_fraction;
  p.seed = seed;
  p.random_forgery_cap = random_forgery_cap;
  p.pooled_global = pooled;
  return p;
}

DatasetLayout RunConfig::dataset_layout() const {
  DatasetLayout l;
  l.preset = layout_preset == "svc2004" ? LayoutPreset::svc2004 : LayoutPreset::column_mapped;
  if (!column_map.empty()) {
    std::stringstream ss(column_map);
    std::string col;
    while (std::getline(ss, col, ',')) l.column_map.push_back(col);
  }
  l.filename_rule = filename_rule;
  l.genuine_per_user = genuine_per_user;
  l.forgery_per_user = forgery_per_user;
  return l;
}

}  // namespace sigverify
