#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sigverify/error.hpp"
#include "sigverify/features.hpp"
#include "sigverify/patches.hpp"
#include "sigverify/rng.hpp"

using namespace sigverify;

namespace {

SignatureImage noise_image(std::mt19937_64& g, int height, int width) {
  SignatureImage img;
  img.height = height;
  img.width = width;
  img.pressure.resize(height, width);
  img.time.resize(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      img.pressure(r, c) = uniform01(g);
      img.time(r, c) = uniform01(g);
    }
  return img;
}

/// Bank with arbitrary (not trained) weights and whitening, exercising the
/// full affine pipeline.
FeatureBank random_bank(std::mt19937_64& g, int h, int ph, int pw, int retained_k) {
  const int d = 2 * ph * pw;
  FeatureBank bank;
  bank.patch_h = ph;
  bank.patch_w = pw;
  bank.whitening.mean.resize(d);
  for (int j = 0; j < d; ++j) bank.whitening.mean(j) = 0.1 * normal(g);
  bank.whitening.basis.resize(retained_k, d);
  for (int j = 0; j < bank.whitening.basis.size(); ++j) bank.whitening.basis(j) = 0.5 * normal(g);
  bank.whitening.retained_k = retained_k;
  bank.params.W1.resize(h, retained_k);
  for (int j = 0; j < bank.params.W1.size(); ++j) bank.params.W1(j) = 0.4 * normal(g);
  bank.params.b1.resize(h);
  for (int j = 0; j < h; ++j) bank.params.b1(j) = 0.2 * normal(g);
  bank.params.W2 = Eigen::MatrixXd::Zero(retained_k, h);
  bank.params.b2 = Eigen::VectorXd::Zero(retained_k);
  return bank;
}

/// Direct per-position reimplementation: flatten, center, whiten, sigmoid.
double naive_activation(const FeatureBank& bank, const SignatureImage& img, int feature, int r,
                        int c) {
  Eigen::VectorXd p = flatten_patch(img, r, c, bank.patch_h, bank.patch_w);
  p.array() -= p.mean();
  Eigen::VectorXd z = bank.whitening.basis * (p - bank.whitening.mean);
  double val = bank.params.W1.row(feature).dot(z) + bank.params.b1(feature);
  return 1.0 / (1.0 + std::exp(-val));
}

/// Region mean over explicit loops, boundaries recomputed the documented way.
double naive_pool_cell(const FeatureMaps& maps, int pool_rows, int pool_cols, int feature, int ri,
                       int ci) {
  auto lo = [](int total, int parts, int i) {
    int base = total / parts, rem = total % parts, pos = 0;
    for (int k = 0; k < i; ++k) pos += base + (k >= parts - rem ? 1 : 0);
    return pos;
  };
  int r0 = lo(maps.out_h, pool_rows, ri), r1 = lo(maps.out_h, pool_rows, ri + 1);
  int c0 = lo(maps.out_w, pool_cols, ci), c1 = lo(maps.out_w, pool_cols, ci + 1);
  double sum = 0.0;
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) sum += maps.at(feature, r, c);
  return sum / ((r1 - r0) * (c1 - c0));
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("convolution agrees with the per-position reimplementation") {
  std::mt19937_64 g(301);
  for (int trial = 0; trial < 50; ++trial) {
    int ph = 2 + static_cast<int>(uniform_index(g, 4));
    int pw = 2 + static_cast<int>(uniform_index(g, 4));
    int height = ph + static_cast<int>(uniform_index(g, 24 - ph));
    int width = pw + static_cast<int>(uniform_index(g, 24 - pw));
    int h = 1 + static_cast<int>(uniform_index(g, 6));
    int k = 1 + static_cast<int>(uniform_index(g, static_cast<std::uint64_t>(2 * ph * pw)));
    FeatureBank bank = random_bank(g, h, ph, pw, k);
    SignatureImage img = noise_image(g, height, width);

    FeatureMaps fm = convolve(bank, img);
    REQUIRE(fm.out_h == height - ph + 1);
    REQUIRE(fm.out_w == width - pw + 1);
    REQUIRE(fm.maps.rows() == h);
    for (int f = 0; f < h; ++f)
      for (int r = 0; r < fm.out_h; ++r)
        for (int c = 0; c < fm.out_w; ++c) {
          double want = naive_activation(bank, img, f, r, c);
          CHECK(std::abs(fm.at(f, r, c) - want) < 1e-10);
        }
  }
}

TEST_CASE("constant images give position-independent activations") {
  std::mt19937_64 g(302);
  FeatureBank bank = random_bank(g, 4, 3, 3, 7);
  SignatureImage img;
  img.height = 10;
  img.width = 12;
  img.pressure = Eigen::MatrixXd::Constant(10, 12, 0.6);
  img.time = Eigen::MatrixXd::Constant(10, 12, 0.3);
  FeatureMaps fm = convolve(bank, img);
  for (int f = 0; f < 4; ++f) {
    double v0 = fm.at(f, 0, 0);
    for (int r = 0; r < fm.out_h; ++r)
      for (int c = 0; c < fm.out_w; ++c) CHECK(fm.at(f, r, c) == doctest::Approx(v0).epsilon(1e-12));
  }
}

TEST_CASE("identity whitening and a delta filter read single pixels") {
  // basis = I, mean = 0, W1 row = delta on the first pressure pixel: the
  // activation is sigmoid of the DC-removed top-left pixel of each patch
  const int ph = 2, pw = 2, d = 8;
  FeatureBank bank;
  bank.patch_h = ph;
  bank.patch_w = pw;
  bank.whitening.mean = Eigen::VectorXd::Zero(d);
  bank.whitening.basis = Eigen::MatrixXd::Identity(d, d);
  bank.whitening.retained_k = d;
  bank.params.W1 = Eigen::MatrixXd::Zero(1, d);
  bank.params.W1(0, 0) = 1.0;
  bank.params.b1 = Eigen::VectorXd::Zero(1);
  bank.params.W2 = Eigen::MatrixXd::Zero(d, 1);
  bank.params.b2 = Eigen::VectorXd::Zero(d);

  SignatureImage img;
  img.height = 3;
  img.width = 3;
  img.pressure.resize(3, 3);
  img.pressure << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  img.time = Eigen::MatrixXd::Zero(3, 3);

  FeatureMaps fm = convolve(bank, img);
  REQUIRE(fm.out_h == 2);
  REQUIRE(fm.out_w == 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      // patch mean over both channels (time channel is zero)
      double mean = (img.pressure.block(r, c, 2, 2).sum()) / 8.0;
      double want = 1.0 / (1.0 + std::exp(-(img.pressure(r, c) - mean)));
      CHECK(fm.at(0, r, c) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("mean pooling agrees with the loop oracle on uneven grids") {
  std::mt19937_64 g(303);
  for (int trial = 0; trial < 30; ++trial) {
    FeatureMaps fm;
    fm.out_h = 1 + static_cast<int>(uniform_index(g, 17));
    fm.out_w = 1 + static_cast<int>(uniform_index(g, 17));
    int h = 1 + static_cast<int>(uniform_index(g, 5));
    fm.maps.resize(h, fm.out_h * fm.out_w);
    for (int j = 0; j < fm.maps.size(); ++j) fm.maps(j) = uniform01(g);
    int pr = 1 + static_cast<int>(uniform_index(g, static_cast<std::uint64_t>(fm.out_h)));
    int pc = 1 + static_cast<int>(uniform_index(g, static_cast<std::uint64_t>(fm.out_w)));

    FeatureVector fv = mean_pool(fm, pr, pc);
    REQUIRE(fv.values.size() == static_cast<Eigen::Index>(h) * pr * pc);
    CHECK(fv.pool_rows == pr);
    CHECK(fv.pool_cols == pc);
    for (int f = 0; f < h; ++f)
      for (int ri = 0; ri < pr; ++ri)
        for (int ci = 0; ci < pc; ++ci) {
          double want = naive_pool_cell(fm, pr, pc, f, ri, ci);
          double got = fv.values(static_cast<Eigen::Index>(f) * pr * pc + ri * pc + ci);
          CHECK(std::abs(got - want) < 1e-12);
        }
  }
}

TEST_CASE("remainder pixels land in the trailing pool regions") {
  // 7 columns over 3 regions: widths 2,2,3 (trailing gets the extra)
  FeatureMaps fm;
  fm.out_h = 1;
  fm.out_w = 7;
  fm.maps.resize(1, 7);
  fm.maps << 0, 1, 2, 3, 4, 5, 6;
  FeatureVector fv = mean_pool(fm, 1, 3);
  REQUIRE(fv.values.size() == 3);
  CHECK(fv.values(0) == doctest::Approx((0.0 + 1.0) / 2));
  CHECK(fv.values(1) == doctest::Approx((2.0 + 3.0) / 2));
  CHECK(fv.values(2) == doctest::Approx((4.0 + 5.0 + 6.0) / 3));
}

TEST_CASE("full-size pooling is the identity flatten") {
  std::mt19937_64 g(304);
  FeatureMaps fm;
  fm.out_h = 3;
  fm.out_w = 4;
  fm.maps.resize(2, 12);
  for (int j = 0; j < fm.maps.size(); ++j) fm.maps(j) = uniform01(g);
  FeatureVector fv = mean_pool(fm, 3, 4);
  REQUIRE(fv.values.size() == 24);
  for (int f = 0; f < 2; ++f)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c)
        CHECK(fv.values(f * 12 + r * 4 + c) == fm.at(f, r, c));
}

TEST_CASE("1x1 pooling averages the whole map") {
  FeatureMaps fm;
  fm.out_h = 2;
  fm.out_w = 3;
  fm.maps.resize(2, 6);
  fm.maps << 1, 2, 3, 4, 5, 6, 10, 20, 30, 40, 50, 60;
  FeatureVector fv = mean_pool(fm, 1, 1);
  REQUIRE(fv.values.size() == 2);
  CHECK(fv.values(0) == doctest::Approx(3.5));
  CHECK(fv.values(1) == doctest::Approx(35.0));
}

TEST_CASE("shape errors carry the right codes") {
  std::mt19937_64 g(305);
  FeatureBank bank = random_bank(g, 2, 4, 4, 5);
  SignatureImage tiny = noise_image(g, 3, 10);
  try {
    convolve(bank, tiny);
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImageTooSmall);
  }

  SignatureImage ok = noise_image(g, 8, 8);
  FeatureMaps fm = convolve(bank, ok);  // 5x5 maps
  try {
    mean_pool(fm, 6, 2);
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoolTooFine);
  }
  CHECK_THROWS_AS(mean_pool(fm, 0, 2), Error);

  // extract == mean_pool(convolve(...))
  FeatureVector direct = extract(bank, ok, 2, 2);
  FeatureVector manual = mean_pool(fm, 2, 2);
  CHECK(direct.values == manual.values);
}

TEST_CASE("all activations stay inside the sigmoid range") {
  std::mt19937_64 g(306);
  FeatureBank bank = random_bank(g, 3, 3, 3, 6);
  SignatureImage img = noise_image(g, 14, 14);
  FeatureVector fv = extract(bank, img, 3, 3);
  for (int i = 0; i < fv.values.size(); ++i) {
    CHECK(fv.values(i) > 0.0);
    CHECK(fv.values(i) < 1.0);
  }
}

}  // TEST_SUITE
