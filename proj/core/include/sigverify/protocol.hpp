#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigverify/dataset.hpp"
#include "sigverify/metrics.hpp"
#include "sigverify/preprocess.hpp"
#include "sigverify/train.hpp"

namespace sigverify {

enum class ForgeryKind : std::uint8_t { skilled = 0, random = 1 };

std::string to_string(ForgeryKind kind);
ForgeryKind forgery_kind_from_string(const std::string& s);

struct ProtocolConfig {
  PreprocessConfig preprocess;
  int pool_rows = 3;
  int pool_cols = 3;
  double reg = 0.01;
  ForgeryKind forgery_kind = ForgeryKind::skilled;
  /// folds >= 2 runs K rounds, enrolling on one fold per round; folds == 1
  /// makes a single seeded split holding out train_fraction for enrollment.
  int folds = 4;
  double train_fraction = 0.25;
  std::uint64_t seed = 0;
  /// Random-forgery signatures sampled per impostor-user pair.
  int random_forgery_cap = 20;
  /// Additionally pool every user's scores into one global EER/AUC.
  bool pooled_global = false;
};

struct UserEvaluation {
  std::string user_id;
  double eer = 0.0;
  double auc = 0.0;
  RocCurve roc;
  ScorePools pools;
};

struct EvaluationReport {
  std::vector<UserEvaluation> per_user;  // sorted by user_id
  double mean_eer = 0.0;
  double mean_auc = 0.0;
  std::optional<double> global_eer;
  std::optional<double> global_auc;
  ForgeryKind forgery_kind = ForgeryKind::skilled;
  int folds = 4;
  double train_fraction = 0.25;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config_snapshot;
};

/// K-fold cross-validated one-class evaluation: per round, enroll on one fold
/// of the user's genuine signatures and score the rest plus forgeries
/// (skilled: the user's forgery files; random: other users' genuine, capped
/// per pair). Pools accumulate over rounds. Deterministic and independent of
/// user iteration order for a fixed seed.
EvaluationReport run_protocol(const Dataset& dataset, const FeatureBank& bank,
                              const ProtocolConfig& config);

struct GridConfig {
  std::vector<int> hidden_sizes;
  std::vector<int> iteration_counts;
  int patch_h = 8;
  int patch_w = 8;
  int n_patches = 50000;
  /// Master seed; patch sampling and weight init use named sub-streams of it.
  std::uint64_t seed = 0;
  AutoencoderHyperparams hyper;  // iterations and seed overridden per cell
  WhitenConfig whiten;
};

struct GridCell {
  int hidden = 0;
  int iterations = 0;
  double mean_eer = 0.0;
  double mean_auc = 0.0;
};

/// Retrains the feature bank for every (hidden, iterations) pair and reruns
/// the protocol. corpus supplies the unlabeled patch source; pass nullptr to
/// learn from all signatures of the evaluation dataset itself.
std::vector<GridCell> hyperparameter_grid(const Dataset& dataset, const Dataset* corpus,
                                          const GridConfig& grid, const ProtocolConfig& protocol);

/// Structured JSON text: protocol block, per-user array, aggregate block.
/// ROC points included only when emit_roc is set. Key order is fixed so equal
/// reports serialize to identical bytes.
std::string report_to_json(const EvaluationReport& report, bool emit_roc);

}  // namespace sigverify
