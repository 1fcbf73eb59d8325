#pragma once

#include "sigverify/train.hpp"
#include "sigverify/types.hpp"

namespace sigverify {

/// Dense activation maps from a valid (no padding, stride 1) convolution.
/// Map j lives in row j, flattened row-major over out_h x out_w positions.
struct FeatureMaps {
  Eigen::MatrixXd maps;  // h x (out_h * out_w)
  int out_h = 0;
  int out_w = 0;

  double at(int feature, int r, int c) const { return maps(feature, r * out_w + c); }
};

/// Pooled feature vector, feature-major then row-major over pool regions.
struct FeatureVector {
  Eigen::VectorXd values;
  int pool_rows = 0;
  int pool_cols = 0;
};

/// For every valid position: flatten the two-channel patch, remove its DC
/// mean, whiten with the bank's transform, apply sigmoid(W1 z + b1). The
/// whitening and W1 are precomposed into one affine map per hidden unit.
FeatureMaps convolve(const FeatureBank& bank, const SignatureImage& image);

/// Partition each map into pool_rows x pool_cols rectangles (remainder pixels
/// go to the trailing regions) and average within each.
FeatureVector mean_pool(const FeatureMaps& maps, int pool_rows, int pool_cols);

FeatureVector extract(const FeatureBank& bank, const SignatureImage& image, int pool_rows,
                      int pool_cols);

}  // namespace sigverify
