// Copyright 2026 The noiseinv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "noiseinv/binary_io.hpp"
#include "noiseinv/gradcheck.hpp"
#include "noiseinv/ynet.hpp"
#include "test_util.hpp"

namespace noiseinv {
namespace {

using testing::random_matrix;

YNetConfig small_config() { return make_ynet_config(6, 4, {5, 7}, {6}, std::vector<std::size_t>{3}); }

// Step-by-step scalar re-implementation of one stack.
std::vector<double> scalar_stack(const std::vector<AffineLayer>& layers, std::vector<double> v,
                                 bool relu_last) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<double> out(L.out_dim());
    for (std::size_t o = 0; o < L.out_dim(); ++o) {
      double s = L.biases(o, 0);
      for (std::size_t i = 0; i < L.in_dim(); ++i) s += L.weights(o, i) * v[i];
      const bool last = l + 1 == layers.size();
      out[o] = (!last || relu_last) ? (s > 0 ? s : 0.0) : s;
    }
    v = std::move(out);
  }
  return v;
}

BatchLabels mixed_labels(std::size_t n, std::size_t classes, std::mt19937_64& rng) {
  BatchLabels labels;
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(classes - 1));
  for (std::size_t i = 0; i < n; ++i) {
    labels.y.push_back(pick(rng));
    labels.d.push_back(static_cast<std::uint8_t>(i % 2));
  }
  return labels;
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(small_config().validate());
  YNetConfig bad = small_config();
  bad.discriminator_layers = {3, 2};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = small_config();
  bad.recognizer_layers = {1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_EQ(default_discriminator_width(128), 32u);
  EXPECT_EQ(default_discriminator_width(20), 16u);
}

TEST(Init, Deterministic) {
  EXPECT_EQ(init_params(small_config(), 4), init_params(small_config(), 4));
  EXPECT_NE(init_params(small_config(), 4), init_params(small_config(), 5));
}

TEST(Init, BiasesZero) {
  const YNetParams p = init_params(small_config(), 1);
  for (const auto* stack : {&p.encoder, &p.recognizer, &p.discriminator})
    for (const auto& layer : *stack)
      for (double b : layer.biases.values()) EXPECT_EQ(b, 0.0);
}

TEST(Init, GlorotVariance) {
  const YNetConfig cfg = make_ynet_config(512, 2, {512}, {}, std::vector<std::size_t>{});
  const YNetParams p = init_params(cfg, 9);
  const Matrix& w = p.encoder[0].weights;
  double mean = 0.0, sq = 0.0;
  for (double v : w.values()) mean += v;
  mean /= static_cast<double>(w.size());
  for (double v : w.values()) sq += (v - mean) * (v - mean);
  const double var = sq / static_cast<double>(w.size());
  const double expected = 2.0 / (512 + 512);
  EXPECT_NEAR(var, expected, 0.2 * expected);
}

TEST(Init, DiscriminatorDoesNotShiftSharedLayers) {
  YNetConfig branch_free = small_config();
  branch_free.discriminator_layers.clear();
  const YNetParams a = init_params(small_config(), 3);
  const YNetParams b = init_params(branch_free, 3);
  EXPECT_EQ(a.encoder, b.encoder);
  EXPECT_EQ(a.recognizer, b.recognizer);
  EXPECT_TRUE(b.discriminator.empty());
}

TEST(Forward, ZeroParamsAreUniform) {
  YNetParams p = init_params(small_config(), 1);
  for (auto* stack : {&p.encoder, &p.recognizer, &p.discriminator})
    for (auto& layer : *stack) std::fill(layer.weights.values().begin(), layer.weights.values().end(), 0.0);
  std::mt19937_64 rng(2);
  const ForwardTrace t = forward(p, random_matrix(3, 6, rng));
  for (double v : t.y_hat.values()) EXPECT_DOUBLE_EQ(v, 0.25);
  for (double v : t.d_hat.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Forward, IdenticalRowsGiveIdenticalOutputs) {
  const YNetParams p = init_params(small_config(), 1);
  Matrix x(4, 6);
  std::mt19937_64 rng(3);
  const Matrix row = random_matrix(1, 6, rng);
  for (std::size_t r = 0; r < 4; ++r) std::copy(row.values().begin(), row.values().end(), x.row(r).begin());
  const ForwardTrace t = forward(p, x);
  for (std::size_t r = 1; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(t.y_hat(r, c), t.y_hat(0, c));
    EXPECT_EQ(t.d_hat(r, 0), t.d_hat(0, 0));
  }
}

TEST(Forward, MatchesScalarOracle) {
  YNetParams p = init_params(small_config(), 7);
  std::mt19937_64 rng(8);
  for (auto* stack : {&p.encoder, &p.recognizer, &p.discriminator})
    for (auto& layer : *stack) layer.biases = random_matrix(layer.out_dim(), 1, rng, 0.2);
  const Matrix x = random_matrix(1, 6, rng);
  const ForwardTrace t = forward(p, x);

  const auto x0 = x.row(0);
  const auto h = scalar_stack(p.encoder, {x0.begin(), x0.end()}, true);
  const auto logits = scalar_stack(p.recognizer, h, false);
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    EXPECT_NEAR(t.y_hat(0, c), std::exp(logits[c] - mx) / z, 1e-12);
  }
  const double dl = scalar_stack(p.discriminator, h, false)[0];
  EXPECT_NEAR(t.d_hat(0, 0), 1.0 / (1.0 + std::exp(-dl)), 1e-12);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(t.h(0, i), h[i], 1e-12);
}

TEST(LossL1, UniformAndCertain) {
  const Matrix uniform(2, 4, 0.25);
  const std::vector<std::uint32_t> y = {0, 3};
  EXPECT_NEAR(loss_l1(uniform, y), std::log(4.0), 1e-12);
  EXPECT_DOUBLE_EQ(loss_l1(Matrix{{0.0, 1.0}}, std::vector<std::uint32_t>{1}), 0.0);
}

TEST(LossL1, TwoExampleScalarOracle) {
  const Matrix y_hat{{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}};
  const std::vector<std::uint32_t> y = {1, 2};
  EXPECT_NEAR(loss_l1(y_hat, y), -(std::log(0.5) + std::log(0.3)) / 2.0, 1e-12);
}

TEST(LossL1, RejectsOutOfRangeLabel) {
  EXPECT_THROW(loss_l1(Matrix{{0.5, 0.5}}, std::vector<std::uint32_t>{2}), std::invalid_argument);
}

TEST(LossL2, Values) {
  EXPECT_DOUBLE_EQ(loss_l2(Matrix{{1.0}}, std::vector<std::uint8_t>{1}), 0.0);
  EXPECT_NEAR(loss_l2(Matrix{{0.5}}, std::vector<std::uint8_t>{1}), std::log(2.0), 1e-12);
}

TEST(LossL2, MixedBatchScalarOracle) {
  const Matrix d_hat{{0.9}, {0.2}, {0.35}, {0.7}};
  const std::vector<std::uint8_t> d = {1, 0, 1, 0};
  const double expected =
      -(std::log(0.9) + std::log(0.8) + std::log(0.35) + std::log(0.3)) / 4.0;
  EXPECT_NEAR(loss_l2(d_hat, d), expected, 1e-12);
}

TEST(LossL3, Values) {
  EXPECT_NEAR(loss_l3(Matrix{{0.5}}, std::vector<std::uint8_t>{1}), std::log(0.5), 1e-12);
  // A clean frame scored near 0: the discriminator is fully fooled.
  EXPECT_GT(loss_l3(Matrix{{1e-9}}, std::vector<std::uint8_t>{0}), -25.0);
  EXPECT_NEAR(loss_l3(Matrix{{1.0 - 1e-15}}, std::vector<std::uint8_t>{0}), 0.0, 1e-12);
}

TEST(LossL3, FlippedLabelIdentity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix d_hat(9, 1);
    std::vector<std::uint8_t> d(9), flipped(9);
    for (std::size_t i = 0; i < 9; ++i) {
      d_hat(i, 0) = u(rng);
      d[i] = static_cast<std::uint8_t>(rng() % 2);
      flipped[i] = static_cast<std::uint8_t>(1 - d[i]);
    }
    EXPECT_NEAR(-loss_l3(d_hat, d), loss_l2(d_hat, flipped), 1e-12);
  }
}

TEST(Composite, AlphaZeroLeavesDiscriminatorAlone) {
  std::mt19937_64 rng(13);
  const YNetParams p = init_params(small_config(), 2);
  const Matrix x = random_matrix(8, 6, rng);
  const BatchLabels labels = mixed_labels(8, 4, rng);
  const YNetGrads g = composite_backward(p, forward(p, x), labels, 0.0, 0.7);
  for (const auto& layer : g.discriminator) {
    for (double v : layer.weights.values()) EXPECT_EQ(v, 0.0);
    for (double v : layer.biases.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Composite, BetaZeroMatchesBranchFreeNetwork) {
  std::mt19937_64 rng(14);
  const YNetParams p = init_params(small_config(), 2);
  YNetParams plain = p;
  plain.discriminator.clear();
  const Matrix x = random_matrix(8, 6, rng);
  const BatchLabels labels = mixed_labels(8, 4, rng);
  const YNetGrads g = composite_backward(p, forward(p, x), labels, 1.0, 0.0);
  const YNetGrads g_plain = composite_backward(plain, forward(plain, x), labels, 1.0, 0.0);
  EXPECT_EQ(g.encoder, g_plain.encoder);
  EXPECT_EQ(g.recognizer, g_plain.recognizer);
}

TEST(Composite, RejectsBadWeights) {
  std::mt19937_64 rng(15);
  YNetParams p = init_params(small_config(), 2);
  const Matrix x = random_matrix(2, 6, rng);
  const BatchLabels labels = mixed_labels(2, 4, rng);
  const ForwardTrace t = forward(p, x);
  EXPECT_THROW(composite_backward(p, t, labels, -1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(composite_backward(p, t, labels, 1.0, -0.1), std::invalid_argument);
  p.discriminator.clear();
  EXPECT_THROW(composite_backward(p, forward(p, x), labels, 1.0, 0.5), std::invalid_argument);
}

TEST(Composite, FiniteDifferenceSuite) {
  const GradcheckReport report = run_gradcheck(2024, 20);
  ASSERT_EQ(report.cases.size(), 20u);
  EXPECT_LE(report.max_encoder(), kGradcheckTolerance);
  EXPECT_LE(report.max_recognizer(), kGradcheckTolerance);
  EXPECT_LE(report.max_discriminator(), kGradcheckTolerance);
}

TEST(Predict, ConsistentWithForward) {
  std::mt19937_64 rng(16);
  YNetParams p = init_params(small_config(), 5);
  const Matrix x = random_matrix(5, 6, rng);
  const Matrix y = predict(p, x);
  EXPECT_EQ(y, forward(p, x).y_hat);
  p.discriminator.clear();
  EXPECT_EQ(predict(p, x), y);
  const auto cls = predict_classes(p, x);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto row = y.row(r);
    EXPECT_EQ(cls[r], std::max_element(row.begin(), row.end()) - row.begin());
  }
}

TEST(DiscriminatorAccuracy, TieCountsAsClean) {
  EXPECT_DOUBLE_EQ(discriminator_accuracy(Matrix(4, 1, 0.5), std::vector<std::uint8_t>(4, 0)), 1.0);
  EXPECT_DOUBLE_EQ(discriminator_accuracy(Matrix{{0.1}, {0.9}}, std::vector<std::uint8_t>{0, 1}), 1.0);
}

TEST(DiscriminatorAccuracy, RandomScoresNearHalf) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 20000;
  Matrix d_hat(n, 1);
  std::vector<std::uint8_t> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d_hat(i, 0) = u(rng);
    d[i] = static_cast<std::uint8_t>(i % 2);
  }
  EXPECT_NEAR(discriminator_accuracy(d_hat, d), 0.5, 0.02);
}

TEST(Checkpoint, RoundTrip) {
  const YNetParams p = init_params(small_config(), 6);
  const auto bytes = serialize_params(p);
  EXPECT_EQ(deserialize_params(bytes), p);
  EXPECT_EQ(serialize_params(deserialize_params(bytes)), bytes);

  YNetParams plain = p;
  plain.discriminator.clear();
  EXPECT_EQ(deserialize_params(serialize_params(plain)), plain);

  const auto path = testing::scratch_dir("ckpt") / "m.ynet";
  save_checkpoint(p, path);
  const YNetConfig cfg = small_config();
  EXPECT_EQ(load_checkpoint(path, &cfg), p);
}

TEST(Checkpoint, RejectsCorruption) {
  const auto bytes = serialize_params(init_params(small_config(), 6));
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_params(std::span(bytes).first(cut)), FormatError) << cut;
  }
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(deserialize_params(extra), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_params(bad_magic), FormatError);
}

TEST(Checkpoint, RejectsConfigMismatch) {
  const auto path = testing::scratch_dir("ckpt_mismatch") / "m.ynet";
  save_checkpoint(init_params(small_config(), 6), path);
  YNetConfig other = small_config();
  other.encoder_layers = {5, 8};
  EXPECT_THROW(load_checkpoint(path, &other), FormatError);
}

}  // namespace
}  // namespace noiseinv
