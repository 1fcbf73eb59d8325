#include "sigverify/patches.hpp"

#include "sigverify/error.hpp"
#include "sigverify/rng.hpp"

namespace sigverify {

Eigen::VectorXd flatten_patch(const SignatureImage& image, int row, int col, int patch_h,
                              int patch_w) {
  const int area = patch_h * patch_w;
  Eigen::VectorXd v(2 * area);
  for (int r = 0; r < patch_h; ++r) {
    for (int c = 0; c < patch_w; ++c) {
      v(r * patch_w + c) = image.pressure(row + r, col + c);
      v(area + r * patch_w + c) = image.time(row + r, col + c);
    }
  }
  return v;
}

PatchSet sample_patches(const std::vector<SignatureImage>& images, int n_patches, int patch_h,
                        int patch_w, std::uint64_t seed) {
  if (images.empty()) raise(ErrorCode::EmptyDataset, "no images to sample patches from");
  if (n_patches <= 0) raise(ErrorCode::ConfigError, "n_patches must be positive");
  if (patch_h <= 0 || patch_w <= 0) raise(ErrorCode::ConfigError, "patch size must be positive");
  for (const auto& img : images) {
    if (patch_h > img.height || patch_w > img.width)
      raise(ErrorCode::PatchTooLarge, "patch " + std::to_string(patch_h) + "x" +
                                          std::to_string(patch_w) + " exceeds image " +
                                          std::to_string(img.height) + "x" +
                                          std::to_string(img.width));
  }

  std::mt19937_64 gen(seed);
  PatchSet set;
  set.patch_h = patch_h;
  set.patch_w = patch_w;
  set.patches.resize(n_patches, 2 * patch_h * patch_w);
  for (int i = 0; i < n_patches; ++i) {
    const std::size_t which = uniform_index(gen, images.size());
    const SignatureImage& img = images[which];
    const int row = static_cast<int>(
        uniform_index(gen, static_cast<std::size_t>(img.height - patch_h + 1)));
    const int col = static_cast<int>(
        uniform_index(gen, static_cast<std::size_t>(img.width - patch_w + 1)));
    set.patches.row(i) = flatten_patch(img, row, col, patch_h, patch_w).transpose();
  }
  return set;
}

PatchSet remove_dc(const PatchSet& patches) {
  if (patches.mean_removed) raise(ErrorCode::AlreadyRemoved, "patch means already removed");
  PatchSet out = patches;
  out.patches.colwise() -= patches.patches.rowwise().mean();
  out.mean_removed = true;
  return out;
}

}  // namespace sigverify
