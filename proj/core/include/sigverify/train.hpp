#pragma once

#include <vector>

#include "sigverify/autoencoder.hpp"
#include "sigverify/patches.hpp"
#include "sigverify/whitening.hpp"

namespace sigverify {

struct WhitenConfig {
  double epsilon = 0.1;
  double variance_to_keep = 0.99;
  WhitenMode mode = WhitenMode::pca;
};

/// The reusable learned model: encoder weights, the whitening transform they
/// expect, and the settings they were trained under.
struct FeatureBank {
  AutoencoderParams params;
  WhiteningTransform whitening;
  AutoencoderHyperparams hyper;
  int patch_h = 0;
  int patch_w = 0;
  std::vector<double> training_cost_trace;

  int hidden_dim() const { return params.hidden_dim(); }
};

/// remove_dc (unless already done) -> fit whitening -> seeded init -> L-BFGS.
/// A failed line search keeps the last iterate and warns on stderr.
FeatureBank train_features(const PatchSet& patches, int hidden_dim,
                           const AutoencoderHyperparams& hyper, const WhitenConfig& whiten);

}  // namespace sigverify
