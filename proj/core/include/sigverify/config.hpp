#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "sigverify/dataset.hpp"
#include "sigverify/preprocess.hpp"
#include "sigverify/protocol.hpp"

namespace sigverify {

/// Every tunable of the pipeline as one flat key set. CLI flags, config file
/// keys, and the snapshot embedded in outputs all share these names.
struct RunConfig {
  // preprocessing
  int raster_width = 64;
  int raster_height = 64;
  bool smooth = true;
  double smooth_factor = 2.0;
  bool rotate = true;
  bool normalize = true;

  // patch sampling
  int patch_h = 8;
  int patch_w = 8;
  int n_patches = 50000;

  // autoencoder
  int hidden = 2000;
  double rho = 0.05;
  double beta = 3.0;
  double lambda = 3e-3;
  int iters = 700;
  int lbfgs_history = 20;
  bool squared_rho_hat = false;

  // whitening
  double whiten_eps = 0.1;
  double variance_keep = 0.99;
  std::string whiten_mode = "pca";

  // pooling
  int pool_rows = 3;
  int pool_cols = 3;

  // classifier
  double reg = 0.01;
  double quantile = 1.0;
  double slack = 1.5;

  // protocol
  std::string forgery_kind = "skilled";
  int folds = 4;
  double train_fraction = 0.25;
  int random_forgery_cap = 20;
  bool pooled = false;

  std::uint64_t seed = 0;

  // dataset layout
  std::string layout_preset = "svc2004";
  std::string filename_rule = "U{user}S{sample}.*";
  std::string column_map;
  int genuine_per_user = 20;
  int forgery_per_user = 20;
  bool fail_fast = true;

  /// Raises ConfigError on the first out-of-range key.
  void validate() const;

  /// Every key with a round-trippable value, ordered by key name.
  std::map<std::string, std::string> snapshot() const;

  /// key=value lines, one per key, in snapshot order.
  std::string to_text() const;

  /// Applies key=value lines (the to_text format) on top of this config.
  /// Keys named in `keep` retain their current values; unknown keys are
  /// skipped so artifacts written by newer versions stay loadable. Raises
  /// ConfigError on a malformed line or value.
  void apply_text(const std::string& text, const std::set<std::string>& keep = {});

  PreprocessConfig preprocess_config() const;
  AutoencoderHyperparams hyper_config() const;  // seed routed through the "init" stream
  WhitenConfig whiten_config() const;
  ProtocolConfig protocol_config() const;
  DatasetLayout dataset_layout() const;
};

}  // namespace sigverify
