#pragma once

#include <cstdint>
#include <vector>

#include "sigverify/types.hpp"

namespace sigverify {

/// A batch of flattened two-channel patches, one per row. Each patch is laid
/// out row-major, pressure channel first, so d = 2 * patch_h * patch_w.
struct PatchSet {
  Eigen::MatrixXd patches;  // m x d
  int patch_h = 0;
  int patch_w = 0;
  bool mean_removed = false;

  int count() const { return static_cast<int>(patches.rows()); }
  int dim() const { return static_cast<int>(patches.cols()); }
};

/// Draw n_patches patches uniformly over (image, top-left position).
/// Deterministic for a fixed seed.
PatchSet sample_patches(const std::vector<SignatureImage>& images, int n_patches, int patch_h,
                        int patch_w, std::uint64_t seed);

/// Flatten one patch at (row, col) of an image into a length-d vector.
Eigen::VectorXd flatten_patch(const SignatureImage& image, int row, int col, int patch_h,
                              int patch_w);

/// Subtract each patch's own scalar mean (per-row DC removal).
PatchSet remove_dc(const PatchSet& patches);

}  // namespace sigverify
