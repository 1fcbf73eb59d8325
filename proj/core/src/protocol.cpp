#include "sigverify/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "sigverify/classifier.hpp"
#include "sigverify/error.hpp"
#include "sigverify/rng.hpp"

namespace sigverify {

std::string to_string(ForgeryKind kind) {
  return kind == ForgeryKind::skilled ? "skilled" : "random";
}

ForgeryKind forgery_kind_from_string(const std::string& s) {
  if (s == "skilled") return ForgeryKind::skilled;
  if (s == "random") return ForgeryKind::random;
  raise(ErrorCode::ConfigError, "unknown forgery kind '" + s + "'");
}

namespace {

FeatureVector signature_features(const RawSignature& sig, const FeatureBank& bank,
                                 const ProtocolConfig& config) {
  try {
    SignatureImage img = preprocess_pipeline(sig, config.preprocess);
    return extract(bank, img, config.pool_rows, config.pool_cols);
  } catch (const Error& e) {
    raise(e.code(), sig.user_id + " (" + sig.source_path + "): " + e.what());
  }
}

// Enrollment index ranges into the user's shuffled order, one per round.
std::vector<std::pair<int, int>> enroll_ranges(int n, const std::string& user,
                                               const ProtocolConfig& config) {
  if (config.folds == 1) {
    if (n < 3)
      raise(ErrorCode::InsufficientGenuine,
            "user " + user + " has " + std::to_string(n) + " genuine signatures; a " +
                "single split needs at least 3");
    int train = static_cast<int>(std::llround(config.train_fraction * n));
    train = std::clamp(train, 2, n - 1);
    return {{0, train}};
  }
  const int base = n / config.folds;
  if (base < 2)
    raise(ErrorCode::InsufficientGenuine,
          "user " + user + " has " + std::to_string(n) + " genuine signatures; " +
              std::to_string(config.folds) + " folds need at least " +
              std::to_string(2 * config.folds));
  const int rem = n % config.folds;
  std::vector<std::pair<int, int>> ranges;
  int start = 0;
  for (int f = 0; f < config.folds; ++f) {
    const int size = base + (f < rem ? 1 : 0);
    ranges.emplace_back(start, start + size);
    start += size;
  }
  return ranges;
}

}  // namespace

EvaluationReport run_protocol(const Dataset& dataset, const FeatureBank& bank,
                              const ProtocolConfig& config) {
  if (config.folds < 1) raise(ErrorCode::ConfigError, "folds must be >= 1");
  if (config.folds == 1 && !(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    raise(ErrorCode::ConfigError, "train_fraction must lie in (0, 1)");
  if (config.random_forgery_cap < 1)
    raise(ErrorCode::ConfigError, "random_forgery_cap must be >= 1");
  if (dataset.users.empty()) raise(ErrorCode::EmptyDataset, "no users to evaluate");

  // Feature extraction once per signature; rounds only refit the Gaussian.
  std::map<std::string, std::vector<FeatureVector>> genuine_feats;
  std::map<std::string, std::vector<FeatureVector>> forgery_feats;
  for (const auto& [user, sigs] : dataset.users) {
    auto& gv = genuine_feats[user];
    gv.reserve(sigs.genuine.size());
    for (const auto& s : sigs.genuine) gv.push_back(signature_features(s, bank, config));
    if (config.forgery_kind == ForgeryKind::skilled) {
      auto& fv = forgery_feats[user];
      fv.reserve(sigs.forgeries.size());
      for (const auto& s : sigs.forgeries) fv.push_back(signature_features(s, bank, config));
    }
  }

  EvaluationReport report;
  report.forgery_kind = config.forgery_kind;
  report.folds = config.folds;
  report.train_fraction = config.train_fraction;
  report.seed = config.seed;

  const std::uint64_t fold_ns = named_seed(config.seed, "folds");
  const std::uint64_t rnd_ns = named_seed(config.seed, "rndforg");

  for (const auto& [user, sigs] : dataset.users) {
    const auto& gv = genuine_feats[user];
    const int n = static_cast<int>(gv.size());
    const auto ranges = enroll_ranges(n, user, config);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 fold_rng(named_seed(fold_ns, user));
    shuffle(order, fold_rng);

    // Random forgeries are drawn once per impostor pair and rescored each
    // round, mirroring how skilled forgery files are reused across rounds.
    std::vector<const FeatureVector*> forgeries;
    if (config.forgery_kind == ForgeryKind::skilled) {
      for (const auto& f : forgery_feats[user]) forgeries.push_back(&f);
    } else {
      for (const auto& [other, other_sigs] : dataset.users) {
        if (other == user) continue;
        const auto& ov = genuine_feats[other];
        std::vector<int> pick(ov.size());
        std::iota(pick.begin(), pick.end(), 0);
        std::mt19937_64 pair_rng(named_seed(named_seed(rnd_ns, user), other));
        shuffle(pick, pair_rng);
        const std::size_t take =
            std::min<std::size_t>(ov.size(), static_cast<std::size_t>(config.random_forgery_cap));
        for (std::size_t i = 0; i < take; ++i) forgeries.push_back(&ov[pick[i]]);
      }
    }
    if (forgeries.empty())
      raise(ErrorCode::EmptyPool, "user " + user + " has no forgery attempts to score");

    UserEvaluation ue;
    ue.user_id = user;
    ue.pools.user_id = user;
    for (const auto& [lo, hi] : ranges) {
      std::vector<FeatureVector> enroll;
      enroll.reserve(hi - lo);
      for (int i = lo; i < hi; ++i) enroll.push_back(gv[order[i]]);
      UserModel model = fit_user_model(enroll, config.reg, user);
      for (int i = 0; i < n; ++i) {
        if (i >= lo && i < hi) continue;
        ue.pools.genuine.push_back(score(model, gv[order[i]]));
      }
      for (const FeatureVector* f : forgeries) ue.pools.forgery.push_back(score(model, *f));
    }

    ue.roc = roc_curve(ue.pools);
    ue.eer = eer(ue.roc);
    ue.auc = auc(ue.roc);
    report.per_user.push_back(std::move(ue));
  }

  double eer_sum = 0.0, auc_sum = 0.0;
  for (const auto& ue : report.per_user) {
    eer_sum += ue.eer;
    auc_sum += ue.auc;
  }
  report.mean_eer = eer_sum / static_cast<double>(report.per_user.size());
  report.mean_auc = auc_sum / static_cast<double>(report.per_user.size());

  if (config.pooled_global) {
    ScorePools global;
    global.user_id = "__pooled__";
    for (const auto& ue : report.per_user) {
      global.genuine.insert(global.genuine.end(), ue.pools.genuine.begin(),
                            ue.pools.genuine.end());
      global.forgery.insert(global.forgery.end(), ue.pools.forgery.begin(),
                            ue.pools.forgery.end());
    }
    RocCurve curve = roc_curve(global);
    report.global_eer = eer(curve);
    report.global_auc = auc(curve);
  }
  return report;
}

std::vector<GridCell> hyperparameter_grid(const Dataset& dataset, const Dataset* corpus,
                                          const GridConfig& grid, const ProtocolConfig& protocol) {
  if (grid.hidden_sizes.empty() || grid.iteration_counts.empty())
    raise(ErrorCode::ConfigError, "hyperparameter grid must have at least one cell");

  const Dataset& source = corpus != nullptr ? *corpus : dataset;
  std::vector<SignatureImage> images;
  for (const auto& [user, sigs] : source.users) {
    for (const auto& s : sigs.genuine)
      images.push_back(preprocess_pipeline(s, protocol.preprocess));
    for (const auto& s : sigs.forgeries)
      images.push_back(preprocess_pipeline(s, protocol.preprocess));
  }

  PatchSet patches = sample_patches(images, grid.n_patches, grid.patch_h, grid.patch_w,
                                    named_seed(grid.seed, "patches"));

  std::vector<GridCell> table;
  for (int hidden : grid.hidden_sizes) {
    for (int iters : grid.iteration_counts) {
      AutoencoderHyperparams hyper = grid.hyper;
      hyper.iterations = iters;
      hyper.seed = named_seed(grid.seed, "init");
      FeatureBank bank = train_features(patches, hidden, hyper, grid.whiten);
      EvaluationReport report = run_protocol(dataset, bank, protocol);
      table.push_back({hidden, iters, report.mean_eer, report.mean_auc});
    }
  }
  return table;
}

std::string report_to_json(const EvaluationReport& report, bool emit_roc) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["protocol"]["forgery_kind"] = to_string(report.forgery_kind);
  j["protocol"]["folds"] = report.folds;
  j["protocol"]["train_fraction"] = report.train_fraction;
  j["protocol"]["seed"] = report.seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config_snapshot) cfg[k] = v;
  j["protocol"]["config"] = std::move(cfg);

  j["aggregate"]["users"] = report.per_user.size();
  j["aggregate"]["mean_eer"] = report.mean_eer;
  j["aggregate"]["mean_auc"] = report.mean_auc;
  if (report.global_eer.has_value()) j["aggregate"]["global_eer"] = *report.global_eer;
  if (report.global_auc.has_value()) j["aggregate"]["global_auc"] = *report.global_auc;

  nlohmann::ordered_json users = nlohmann::ordered_json::array();
  for (const auto& ue : report.per_user) {
    nlohmann::ordered_json u;
    u["user"] = ue.user_id;
    u["eer"] = ue.eer;
    u["auc"] = ue.auc;
    u["genuine_scores"] = ue.pools.genuine.size();
    u["forgery_scores"] = ue.pools.forgery.size();
    if (emit_roc) {
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      // Non-finite sentinel thresholds serialize as null by library rule.
      for (const auto& p : ue.roc.points) pts.push_back({p.far, p.frr, p.threshold});
      u["roc"] = std::move(pts);
    }
    users.push_back(std::move(u));
  }
  j["per_user"] = std::move(users);
  return j.dump(2) + "\n";
}

}  // namespace sigverify
