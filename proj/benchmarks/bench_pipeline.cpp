#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sigverify/autoencoder.hpp"
#include "sigverify/classifier.hpp"
#include "sigverify/features.hpp"
#include "sigverify/patches.hpp"
#include "sigverify/preprocess.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/synthetic.hpp"
#include "sigverify/whitening.hpp"

using namespace sigverify;

namespace {

// Shared inputs built once; the timed loops touch only steady-state work.

SignatureImage sample_image() {
  RawSignature sig = generate_synthetic_signature(42, 3, 0.05);
  return preprocess_pipeline(sig, PreprocessConfig{});
}

FeatureBank sample_bank(int hidden, int patch, int whitened_dim) {
  std::mt19937_64 rng(7);
  const int d = 2 * patch * patch;
  FeatureBank bank;
  bank.patch_h = patch;
  bank.patch_w = patch;
  bank.params.W1.resize(hidden, whitened_dim);
  bank.params.b1.resize(hidden);
  bank.params.W2 = Eigen::MatrixXd::Zero(whitened_dim, hidden);
  bank.params.b2 = Eigen::VectorXd::Zero(whitened_dim);
  for (int r = 0; r < hidden; ++r) {
    bank.params.b1(r) = normal(rng) * 0.3;
    for (int c = 0; c < whitened_dim; ++c) bank.params.W1(r, c) = normal(rng) * 0.5;
  }
  bank.whitening.mean = Eigen::VectorXd::Zero(d);
  bank.whitening.basis.resize(whitened_dim, d);
  for (int r = 0; r < whitened_dim; ++r)
    for (int c = 0; c < d; ++c) bank.whitening.basis(r, c) = normal(rng) * 0.3;
  bank.whitening.retained_k = whitened_dim;
  return bank;
}

void BM_PreprocessPipeline(benchmark::State& state) {
  RawSignature sig = generate_synthetic_signature(42, 3, 0.05);
  PreprocessConfig pre;
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_pipeline(sig, pre));
}
BENCHMARK(BM_PreprocessPipeline);

void BM_SparseCostGrad(benchmark::State& state) {
  const int k = 64;
  const int h = 64;
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  Eigen::MatrixXd X(k, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < k; ++r) X(r, c) = uniform01(rng);
  Eigen::VectorXd theta = pack_params(init_params(k, h, 3));
  AutoencoderHyperparams hp;
  Eigen::VectorXd grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparse_cost_grad(theta, X, h, hp, &grad));
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_SparseCostGrad)->Arg(1024)->Arg(4096);

void BM_ExtractFeatures(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  SignatureImage img = sample_image();
  FeatureBank bank = sample_bank(hidden, 8, 100);
  for (auto _ : state) benchmark::DoNotOptimize(extract(bank, img, 3, 3));
}
BENCHMARK(BM_ExtractFeatures)->Arg(64)->Arg(256);

void BM_VerifyScore(benchmark::State& state) {
  const int dim = 576;  // 64 features x 3x3 pooling
  std::mt19937_64 rng(13);
  std::vector<FeatureVector> train(32);
  for (auto& v : train) {
    v.values.resize(dim);
    v.pool_rows = 3;
    v.pool_cols = 3;
    for (int i = 0; i < dim; ++i) v.values(i) = uniform01(rng);
  }
  UserModel model = fit_user_model(train, 0.01);
  model = calibrate_threshold(std::move(model), train, 1.0, 1.5);
  FeatureVector probe = train[0];
  probe.values.array() += 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(verify(model, probe));
}
BENCHMARK(BM_VerifyScore);

}  // namespace

BENCHMARK_MAIN();
