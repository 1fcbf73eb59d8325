#pragma once

#include <string>
#include <vector>

#include "sigverify/classifier.hpp"
#include "sigverify/train.hpp"

namespace sigverify {

/// On-disk bundle: the learned feature bank, enrolled user models, and the
/// configuration text the run used (free-form, round-tripped verbatim).
struct ModelFile {
  FeatureBank bank;
  std::vector<UserModel> users;
  std::string config_text;
};

/// Little-endian binary container: magic, format version, then checksummed
/// sections. Every numeric field survives a round-trip bit-exactly.
void save_model(const ModelFile& model, const std::string& path);

ModelFile load_model(const std::string& path);

}  // namespace sigverify
