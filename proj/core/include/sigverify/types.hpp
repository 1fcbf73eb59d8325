#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sigverify {

enum class Label { genuine, skilled_forgery, random_forgery };

const char* to_string(Label label);

/// One tablet sample. Coordinates and pressure arrive as integer device
/// units but are kept as doubles so geometric transforms stay exact.
struct SignaturePoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;  // capture-device milliseconds, non-decreasing
  bool pen_down = true;
  double pressure = 0.0;  // >= 0
  double azimuth = 0.0;
  double altitude = 0.0;
};

struct RawSignature {
  std::vector<SignaturePoint> points;
  std::string user_id;
  Label label = Label::genuine;
  std::string source_path;
};

/// Point after coordinate normalization: x/y in [0,100], t and pressure in [0,1].
struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  double pressure = 0.0;
  bool pen_down = true;
};

struct NormalizedSignature {
  std::vector<NormalizedPoint> points;
};

/// Two-layer raster: a pressure channel and a time channel, both
/// height x width with values in [0,1]. Untouched pixels are exactly 0.
struct SignatureImage {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd pressure;  // height x width
  Eigen::MatrixXd time;      // height x width
};

/// Second-order point statistics and the orientation angle derived from them.
struct SignatureStatistics {
  double sx2 = 0.0;     // population variance of x
  double sy2 = 0.0;     // population variance of y
  double cov_xy = 0.0;  // population covariance
  double theta = 0.0;   // radians, in (-pi/2, pi/2]
};

}  // namespace sigverify
