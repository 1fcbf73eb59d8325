#include "sigverify/features.hpp"

#include "sigverify/error.hpp"
#include "sigverify/patches.hpp"

namespace sigverify {

FeatureMaps convolve(const FeatureBank& bank, const SignatureImage& image) {
  const int ph = bank.patch_h, pw = bank.patch_w;
  if (image.height < ph || image.width < pw)
    raise(ErrorCode::ImageTooSmall, "image " + std::to_string(image.height) + "x" +
                                        std::to_string(image.width) +
                                        " is smaller than the patch size");
  const int out_h = image.height - ph + 1;
  const int out_w = image.width - pw + 1;
  const int n = out_h * out_w;
  const int d = 2 * ph * pw;

  // im2col: one flattened patch per column.
  Eigen::MatrixXd P(d, n);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c) P.col(r * out_w + c) = flatten_patch(image, r, c, ph, pw);

  // DC removal + whitening + encoder collapse into sigmoid(M p - pbar v + c0).
  Eigen::MatrixXd M = bank.params.W1 * bank.whitening.basis;       // h x d
  Eigen::VectorXd v = M.rowwise().sum();                           // M * ones
  Eigen::VectorXd c0 = bank.params.b1 - M * bank.whitening.mean;   // h
  Eigen::RowVectorXd pbar = P.colwise().mean();

  FeatureMaps fm;
  fm.out_h = out_h;
  fm.out_w = out_w;
  Eigen::MatrixXd Z = M * P;
  Z.noalias() -= v * pbar;
  Z.colwise() += c0;
  fm.maps = (1.0 / (1.0 + (-Z.array()).exp())).matrix();
  return fm;
}

FeatureVector mean_pool(const FeatureMaps& maps, int pool_rows, int pool_cols) {
  if (pool_rows < 1 || pool_cols < 1)
    raise(ErrorCode::ConfigError, "pool grid must be at least 1x1");
  if (pool_rows > maps.out_h || pool_cols > maps.out_w)
    raise(ErrorCode::PoolTooFine, "pool grid " + std::to_string(pool_rows) + "x" +
                                      std::to_string(pool_cols) + " exceeds map size " +
                                      std::to_string(maps.out_h) + "x" +
                                      std::to_string(maps.out_w));

  // Near-equal splits; the remainder widens the trailing regions.
  auto boundaries = [](int total, int parts) {
    std::vector<int> b(parts + 1);
    const int base = total / parts, rem = total % parts;
    b[0] = 0;
    for (int i = 0; i < parts; ++i) b[i + 1] = b[i] + base + (i >= parts - rem ? 1 : 0);
    return b;
  };
  const std::vector<int> rb = boundaries(maps.out_h, pool_rows);
  const std::vector<int> cb = boundaries(maps.out_w, pool_cols);

  const int h = static_cast<int>(maps.maps.rows());
  FeatureVector fv;
  fv.pool_rows = pool_rows;
  fv.pool_cols = pool_cols;
  fv.values.resize(static_cast<Eigen::Index>(h) * pool_rows * pool_cols);
  for (int j = 0; j < h; ++j) {
    for (int ri = 0; ri < pool_rows; ++ri) {
      for (int ci = 0; ci < pool_cols; ++ci) {
        double sum = 0.0;
        for (int r = rb[ri]; r < rb[ri + 1]; ++r)
          for (int c = cb[ci]; c < cb[ci + 1]; ++c) sum += maps.at(j, r, c);
        const int area = (rb[ri + 1] - rb[ri]) * (cb[ci + 1] - cb[ci]);
        fv.values(static_cast<Eigen::Index>(j) * pool_rows * pool_cols + ri * pool_cols + ci) =
            sum / area;
      }
    }
  }
  return fv;
}

FeatureVector extract(const FeatureBank& bank, const SignatureImage& image, int pool_rows,
                      int pool_cols) {
  return mean_pool(convolve(bank, image), pool_rows, pool_cols);
}

}  // namespace sigverify
