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

// Seeded multi-condition corpus. Each class has a prototype base frame;
// a clean frame is its prototype plus Gaussian jitter, and a noise
// condition distorts a clean frame as
//
//   noisy = gain (.) (clean + bias + sigma * n),   n ~ N(0, I)
//
// Condition 0 is clean. Conditions 1..N stand in for the six Aurora-4 noise
// types. Utterances are runs of constant-class segments so that temporal
// context carries information.

#ifndef NOISEINV_CORPUS_HPP_
#define NOISEINV_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "noiseinv/matrix.hpp"

namespace noiseinv {

inline constexpr std::uint32_t kCleanCondition = 0;

struct NoiseCondition {
  std::uint32_t id = 0;
  std::string name;
  std::vector<double> bias;
  std::vector<double> gain;  // strictly positive
  double sigma = 0.0;

  friend bool operator==(const NoiseCondition&, const NoiseCondition&) = default;
};

/// Names used for conditions 1..6, in id order.
const std::vector<std::string>& default_condition_names();

struct CorpusSpec {
  std::uint32_t num_classes = 32;
  std::uint32_t base_dim = 40;
  std::uint32_t num_conditions = 6;
  std::uint64_t seed = 1;
  std::uint32_t clean_utterances = 440;
  std::uint32_t noisy_utterances_per_condition = 45;
  /// Test utterances for clean and for each noise condition.
  std::uint32_t test_utterances_per_condition = 45;
  std::uint32_t frames_per_utterance = 60;
  std::uint32_t segment_length = 12;
  double proto_scale = 1.0;
  double sigma_clean = 1.5;
  // Ranges the per-condition parameters are drawn from.
  double bias_scale = 0.5;
  double gain_min = 0.5;
  double gain_max = 2.0;
  double sigma_min = 0.4;
  double sigma_max = 1.0;
  /// Correlation of bias and log-gain across conditions. Each condition's
  /// draw is rho * shared + sqrt(1 - rho^2) * own, which leaves the
  /// per-element marginals unchanged.
  double condition_correlation = 0.0;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;

  friend bool operator==(const CorpusSpec&, const CorpusSpec&) = default;
};

struct Utterance {
  Matrix frames;  // T x base_dim
  std::vector<std::uint32_t> labels;
  std::uint32_t condition = kCleanCondition;

  std::size_t num_frames() const { return frames.rows(); }
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Corpus {
  std::uint64_t seed = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t base_dim = 0;
  Matrix prototypes;  // num_classes x base_dim
  std::vector<NoiseCondition> conditions;  // ids 1..N in order
  std::vector<std::uint32_t> train_conditions;
  std::vector<Utterance> train;
  std::vector<Utterance> test;  // clean plus every condition

  const NoiseCondition& condition(std::uint32_t id) const;
  std::size_t num_conditions() const { return conditions.size(); }
  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// The noise conditions a spec defines; independent of which are trained on.
std::vector<NoiseCondition> make_conditions(const CorpusSpec& spec);

/// Builds the corpus. `train_conditions` may be empty (clean-only training);
/// ids outside 1..num_conditions are rejected. Every utterance draws from
/// its own keyed stream, so the clean training data and the whole test set
/// do not depend on the selection.
Corpus generate(const CorpusSpec& spec, std::span<const std::uint32_t> train_conditions);

/// gain (.) (clean + bias + sigma * noise_draw)
std::vector<double> apply_condition(std::span<const double> clean_frame,
                                    const NoiseCondition& cond,
                                    std::span<const double> noise_draw);

// "SYNC1" container, little-endian, f64 payloads.
std::vector<std::uint8_t> serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(std::span<const std::uint8_t> bytes);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace noiseinv

#endif  // NOISEINV_CORPUS_HPP_
