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

// Frame-level input pipeline: static + delta + delta-delta, context
// splicing, then global mean/variance normalization with training-set stats.

#ifndef NOISEINV_FEATURES_HPP_
#define NOISEINV_FEATURES_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "noiseinv/matrix.hpp"

namespace noiseinv {

inline constexpr std::size_t kDeltaWindow = 2;
inline constexpr std::size_t kDefaultContext = 5;
inline constexpr double kStdFloor = 1e-8;

/// Regression deltas over a +-2 frame window, edges replicated:
///   d_t = sum_{n=1..2} n (c_{t+n} - c_{t-n}) / (2 sum_{n=1..2} n^2)
Matrix compute_deltas(const Matrix& frames);

/// [static | delta | delta-delta], so T x F becomes T x 3F.
Matrix append_deltas(const Matrix& frames);

/// Row t becomes frames t-context .. t+context concatenated, with the first
/// and last frame repeated past the utterance boundaries.
Matrix splice(const Matrix& frames, std::size_t context = kDefaultContext);

/// append_deltas followed by splice.
Matrix featurize(const Matrix& base_frames, std::size_t context = kDefaultContext);

/// Width of featurize() output for a given base dimension.
constexpr std::size_t featurized_dim(std::size_t base_dim, std::size_t context) {
  return base_dim * 3 * (2 * context + 1);
}

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;  // floored at kStdFloor

  std::size_t dim() const { return mean.size(); }
  /// FNV-1a over the raw bytes of both vectors.
  std::uint64_t checksum() const;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Per-column mean and population standard deviation. Needs >= 2 rows.
NormStats fit_norm(const Matrix& rows);

void apply_norm_inplace(Matrix& rows, const NormStats& stats);
Matrix apply_norm(const Matrix& rows, const NormStats& stats);

// "NORM1", u32 dim, mean then std as little-endian f64.
std::vector<std::uint8_t> serialize_norm(const NormStats& stats);
NormStats deserialize_norm(std::span<const std::uint8_t> bytes);
void save_norm(const NormStats& stats, const std::filesystem::path& path);
NormStats load_norm(const std::filesystem::path& path);

}  // namespace noiseinv

#endif  // NOISEINV_FEATURES_HPP_
