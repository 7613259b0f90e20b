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


#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "noiseinv/binary_io.hpp"
#include "noiseinv/features.hpp"
#include "test_util.hpp"

namespace noiseinv {
namespace {

using testing::random_matrix;

// Direct loop over the regression formula.
Matrix loop_deltas(const Matrix& c) {
  const long T = static_cast<long>(c.rows());
  Matrix d(c.rows(), c.cols());
  auto at = [&](long t, std::size_t j) { return c(static_cast<std::size_t>(std::clamp(t, 0L, T - 1)), j); };
  for (long t = 0; t < T; ++t)
    for (std::size_t j = 0; j < c.cols(); ++j)
      d(static_cast<std::size_t>(t), j) =
          (1.0 * (at(t + 1, j) - at(t - 1, j)) + 2.0 * (at(t + 2, j) - at(t - 2, j))) / 10.0;
  return d;
}

TEST(Deltas, ConstantUtteranceIsZero) {
  const Matrix frames(9, 4, 2.5);
  const Matrix aug = append_deltas(frames);
  ASSERT_EQ(aug.cols(), 12u);
  for (std::size_t t = 0; t < 9; ++t)
    for (std::size_t j = 4; j < 12; ++j) EXPECT_EQ(aug(t, j), 0.0);
}

TEST(Deltas, RampGivesSlope) {
  Matrix frames(10, 1);
  for (std::size_t t = 0; t < 10; ++t) frames(t, 0) = 0.75 * static_cast<double>(t);
  const Matrix d = compute_deltas(frames);
  for (std::size_t t = 2; t < 8; ++t) EXPECT_DOUBLE_EQ(d(t, 0), 0.75);
}

TEST(Deltas, MatchesLoopOracle) {
  std::mt19937_64 rng(21);
  const Matrix c = random_matrix(7, 2, rng);
  const Matrix d = compute_deltas(c);
  const Matrix expected = loop_deltas(c);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d.values()[i], expected.values()[i], 1e-12);

  const Matrix aug = append_deltas(c);
  const Matrix dd = loop_deltas(expected);
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(aug(t, j), c(t, j));
      EXPECT_NEAR(aug(t, 2 + j), expected(t, j), 1e-12);
      EXPECT_NEAR(aug(t, 4 + j), dd(t, j), 1e-12);
    }
}

TEST(Splice, Widths) {
  EXPECT_EQ(splice(Matrix(3, 120), 5).cols(), 1320u);
  EXPECT_EQ(featurized_dim(40, 5), 1320u);
  EXPECT_EQ(featurize(Matrix(4, 40), 5).cols(), 1320u);
}

TEST(Splice, SingleFrameRepeats) {
  const Matrix one{{1.0, -2.0, 3.0}};
  const Matrix s = splice(one, 5);
  ASSERT_EQ(s.cols(), 33u);
  for (std::size_t k = 0; k < 11; ++k)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(s(0, 3 * k + j), one(0, j));
}

TEST(Splice, ZeroContextIsIdentity) {
  std::mt19937_64 rng(22);
  const Matrix m = random_matrix(5, 3, rng);
  EXPECT_EQ(splice(m, 0), m);
}

TEST(Splice, NeighbourOrder) {
  Matrix m(4, 1);
  for (std::size_t t = 0; t < 4; ++t) m(t, 0) = static_cast<double>(t);
  const Matrix s = splice(m, 2);
  EXPECT_EQ(s, (Matrix{{0, 0, 0, 1, 2}, {0, 0, 1, 2, 3}, {0, 1, 2, 3, 3}, {1, 2, 3, 3, 3}}));
}

TEST(Norm, StandardizesTrainingData) {
  std::mt19937_64 rng(23);
  Matrix rows = random_matrix(500, 6, rng, 3.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) rows(r, 2) += 1e4;
  const NormStats stats = fit_norm(rows);
  const Matrix z = apply_norm(rows, stats);
  for (std::size_t j = 0; j < 6; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, j);
    mean /= 500.0;
    for (std::size_t r = 0; r < z.rows(); ++r) var += (z(r, j) - mean) * (z(r, j) - mean);
    var /= 500.0;
    EXPECT_LE(std::abs(mean), 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
}

TEST(Norm, ConstantColumnIsFloored) {
  Matrix rows(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    rows(r, 0) = 0.1;
    rows(r, 1) = static_cast<double>(r);
  }
  const NormStats stats = fit_norm(rows);
  EXPECT_EQ(stats.std[0], kStdFloor);
  const Matrix z = apply_norm(rows, stats);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(z(r, 0), 0.0);
}

TEST(Norm, ShiftedTestSet) {
  std::mt19937_64 rng(24);
  const Matrix train = random_matrix(200, 3, rng, 2.0);
  const NormStats stats = fit_norm(train);
  const double shift = 1.7;
  Matrix test = train;
  for (auto& v : test.values()) v += shift;
  const Matrix z = apply_norm(test, stats);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, j);
    EXPECT_NEAR(mean / 200.0, shift / stats.std[j], 1e-10);
  }
}

TEST(Norm, Errors) {
  EXPECT_THROW(fit_norm(Matrix(1, 3)), std::invalid_argument);
  const NormStats stats = fit_norm(Matrix(2, 3));
  EXPECT_THROW(apply_norm(Matrix(2, 4), stats), ShapeError);
}

TEST(Norm, RoundTrip) {
  std::mt19937_64 rng(25);
  const NormStats stats = fit_norm(random_matrix(10, 4, rng));
  const auto bytes = serialize_norm(stats);
  EXPECT_EQ(deserialize_norm(bytes), stats);
  EXPECT_EQ(deserialize_norm(bytes).checksum(), stats.checksum());
  EXPECT_THROW(deserialize_norm(std::span(bytes).first(bytes.size() - 1)), FormatError);
  const auto path = testing::scratch_dir("norm") / "n.bin";
  save_norm(stats, path);
  EXPECT_EQ(load_norm(path), stats);
}

}  // namespace
}  // namespace noiseinv
