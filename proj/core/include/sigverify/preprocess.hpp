#pragma once

#include "sigverify/types.hpp"

namespace sigverify {

/// Population second moments of the point cloud plus the orientation angle
/// of the major principal axis (orthogonal regression). When cov_xy == 0 the
/// closed form is undefined and the axis is a coordinate axis: theta = 0 if
/// sx2 >= sy2, pi/2 otherwise.
SignatureStatistics compute_statistics(const RawSignature& sig);

/// Rotate all coordinates by -theta about the centroid; t, pen state and
/// pressure are untouched. rotate(s, compute_statistics(s).theta) aligns the
/// major axis with x.
RawSignature rotate(const RawSignature& sig, double theta);

/// Replace each maximal pen-down run of >= 4 points with a natural cubic
/// spline through its points, resampled at factor times the original count.
/// t and pressure are linearly interpolated; shorter runs and pen-up points
/// pass through unchanged. factor must be >= 1.
RawSignature smooth(const RawSignature& sig, double factor);

/// Scale x and y independently onto [0,100], t onto [0,1] (constant t maps
/// to 0) and pressure onto [0,1] (all-zero pressure maps pen-down points
/// to 1). Throws DegenerateExtent when x or y is constant.
NormalizedSignature normalize(const RawSignature& sig);

/// Identity on coordinates (for pipelines with normalization disabled);
/// t and pressure are still mapped onto [0,1] as the channels require.
NormalizedSignature normalize_passthrough(const RawSignature& sig);

/// Paint the two-channel image. Consecutive pen-down points are connected by
/// an integer-stepped line with pressure and time interpolated along it; a
/// pen-up point breaks connectivity and is not painted. Pixel pressure is
/// the max of covering samples, pixel time the latest covering sample.
/// [0,100]^2 maps onto the grid center preserving aspect (letterbox).
SignatureImage rasterize(const NormalizedSignature& sig, int width, int height);

struct PreprocessConfig {
  bool smooth_enabled = true;
  double smooth_factor = 2.0;
  bool rotate_enabled = true;
  bool normalize_enabled = true;
  int raster_width = 64;
  int raster_height = 64;
};

/// smooth -> rotate by the estimated orientation -> normalize -> rasterize,
/// with each stage toggleable. Deterministic and pure.
SignatureImage preprocess_pipeline(const RawSignature& sig, const PreprocessConfig& config);

}  // namespace sigverify
