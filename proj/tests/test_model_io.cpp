#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sigverify/classifier.hpp"
#include "sigverify/error.hpp"
#include "sigverify/model_io.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/train.hpp"

using namespace sigverify;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const char* name) {
  fs::path dir = fs::temp_directory_path() / "sigverify_tests" / "models";
  fs::create_directories(dir);
  return dir / name;
}

ModelFile sample_model(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  PatchSet patches;
  patches.patch_h = 3;
  patches.patch_w = 3;
  patches.patches.resize(120, 18);
  for (int j = 0; j < patches.patches.size(); ++j) patches.patches(j) = normal(g);

  AutoencoderHyperparams hp;
  hp.iterations = 6;
  hp.seed = seed;
  ModelFile m;
  m.bank = train_features(patches, 5, hp, WhitenConfig{});
  m.config_text = "alpha = 1\nbeta = two\n";

  std::vector<FeatureVector> vecs;
  for (int i = 0; i < 8; ++i) {
    FeatureVector v;
    v.values.resize(5);
    for (int j = 0; j < 5; ++j) v.values(j) = normal(g);
    vecs.push_back(v);
  }
  UserModel u1 = calibrate_threshold(fit_user_model(vecs, 0.05, "alice"), vecs, 1.0, 1.5);
  UserModel u2 = fit_user_model(vecs, 0.2, "bob");  // no threshold
  m.users = {u1, u2};
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

ErrorCode load_code(const fs::path& p) {
  try {
    load_model(p.string());
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("round-trip preserves every field bit-exactly") {
  ModelFile m = sample_model(7);
  fs::path p = tmp_file("roundtrip.bin");
  save_model(m, p.string());
  ModelFile r = load_model(p.string());

  CHECK(r.config_text == m.config_text);
  CHECK(r.bank.params.W1 == m.bank.params.W1);
  CHECK(r.bank.params.b1 == m.bank.params.b1);
  CHECK(r.bank.params.W2 == m.bank.params.W2);
  CHECK(r.bank.params.b2 == m.bank.params.b2);
  CHECK(r.bank.whitening.mean == m.bank.whitening.mean);
  CHECK(r.bank.whitening.basis == m.bank.whitening.basis);
  CHECK(r.bank.whitening.epsilon == m.bank.whitening.epsilon);
  CHECK(r.bank.whitening.retained_k == m.bank.whitening.retained_k);
  CHECK(r.bank.whitening.variance_kept == m.bank.whitening.variance_kept);
  CHECK(r.bank.whitening.mode == m.bank.whitening.mode);
  CHECK(r.bank.hyper.rho == m.bank.hyper.rho);
  CHECK(r.bank.hyper.beta == m.bank.hyper.beta);
  CHECK(r.bank.hyper.lambda == m.bank.hyper.lambda);
  CHECK(r.bank.hyper.iterations == m.bank.hyper.iterations);
  CHECK(r.bank.hyper.lbfgs_history == m.bank.hyper.lbfgs_history);
  CHECK(r.bank.hyper.seed == m.bank.hyper.seed);
  CHECK(r.bank.hyper.squared_activation == m.bank.hyper.squared_activation);
  CHECK(r.bank.patch_h == m.bank.patch_h);
  CHECK(r.bank.patch_w == m.bank.patch_w);
  CHECK(r.bank.training_cost_trace == m.bank.training_cost_trace);

  REQUIRE(r.users.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.users[i].user_id == m.users[i].user_id);
    CHECK(r.users[i].mean == m.users[i].mean);
    CHECK(r.users[i].covariance == m.users[i].covariance);
    CHECK(r.users[i].reg == m.users[i].reg);
    CHECK(r.users[i].threshold == m.users[i].threshold);
    CHECK(r.users[i].train_count == m.users[i].train_count);
  }
  CHECK(r.users[0].threshold.has_value());
  CHECK_FALSE(r.users[1].threshold.has_value());

  // the rebuilt factor scores identically
  FeatureVector probe;
  probe.values = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  CHECK(score(r.users[0], probe) == score(m.users[0], probe));
}

TEST_CASE("saving twice produces identical bytes") {
  ModelFile m = sample_model(9);
  fs::path p1 = tmp_file("dup1.bin"), p2 = tmp_file("dup2.bin");
  save_model(m, p1.string());
  save_model(m, p2.string());
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("an empty user list round-trips") {
  ModelFile m = sample_model(11);
  m.users.clear();
  fs::path p = tmp_file("nousers.bin");
  save_model(m, p.string());
  CHECK(load_model(p.string()).users.empty());
}

TEST_CASE("version and magic are enforced") {
  ModelFile m = sample_model(13);
  fs::path p = tmp_file("tamper.bin");
  save_model(m, p.string());
  std::string bytes = slurp(p);

  std::string wrong_version = bytes;
  wrong_version[8] = 2;  // version little-endian u32 right after the magic
  spit(p, wrong_version);
  CHECK(load_code(p) == ErrorCode::VersionMismatch);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  spit(p, wrong_magic);
  CHECK(load_code(p) == ErrorCode::CorruptFile);

  spit(p, "short");
  CHECK(load_code(p) == ErrorCode::CorruptFile);

  CHECK_THROWS_AS(load_model((tmp_file("missing.bin")).string() + ".nope"), Error);
}

TEST_CASE("payload corruption and truncation are detected") {
  ModelFile m = sample_model(17);
  fs::path p = tmp_file("crc.bin");
  save_model(m, p.string());
  std::string bytes = slurp(p);

  // flip one payload byte deep inside the file: some section's crc must fail
  std::string flipped = bytes;
  flipped[bytes.size() / 2] = static_cast<char>(flipped[bytes.size() / 2] ^ 0x5a);
  spit(p, flipped);
  CHECK(load_code(p) == ErrorCode::CorruptFile);

  // drop the tail: truncated section
  spit(p, bytes.substr(0, bytes.size() - 7));
  CHECK(load_code(p) == ErrorCode::CorruptFile);

  // header only: required sections missing
  spit(p, bytes.substr(0, 12));
  CHECK(load_code(p) == ErrorCode::CorruptFile);

  // garbage appended after the last section
  spit(p, bytes + "junk");
  CHECK(load_code(p) == ErrorCode::CorruptFile);
}

TEST_CASE("non-finite values are refused at save time") {
  ModelFile m = sample_model(19);
  m.bank.params.W1(0, 0) = std::numeric_limits<double>::quiet_NaN();
  fs::path p = tmp_file("nan.bin");
  try {
    save_model(m, p.string());
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("config text with embedded newlines and nulls survives") {
  ModelFile m = sample_model(23);
  m.config_text = std::string("a=1\nb=\0binary\x7f", 15);
  fs::path p = tmp_file("cfg.bin");
  save_model(m, p.string());
  CHECK(load_model(p.string()).config_text == m.config_text);
}

}  // TEST_SUITE
