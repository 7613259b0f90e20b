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

#ifndef NOISEINV_TRAINER_HPP_
#define NOISEINV_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "noiseinv/corpus.hpp"
#include "noiseinv/features.hpp"
#include "noiseinv/ynet.hpp"

namespace noiseinv {

/// Raised when training cannot continue (non-finite loss, bad batch pool).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double learning_rate = 0.08;
  double momentum = 0.9;
  std::size_t max_epochs = 15;
  std::size_t batch_size = 256;
  double alpha = 1.0;
  double beta = 0.5;
  double newbob_start_threshold = 0.005;
  double newbob_stop_threshold = 0.001;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Network shape independent of the corpus dimensions.
struct NetworkSpec {
  std::vector<std::size_t> encoder_layers = {128, 128, 128, 128};
  std::vector<std::size_t> recognizer_hidden = {128, 128};
  /// Unset means one layer of default_discriminator_width(h).
  std::optional<std::vector<std::size_t>> discriminator_hidden;
  std::size_t context = kDefaultContext;

  YNetConfig resolve(std::size_t base_dim, std::size_t num_classes) const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Normalized network inputs with their per-frame labels.
struct FrameSet {
  Matrix features;
  std::vector<std::uint32_t> y;
  std::vector<std::uint8_t> d;
  std::vector<std::uint32_t> condition;

  std::size_t size() const { return y.size(); }
};

/// Featurizes utterances (deltas, splicing) without normalizing.
FrameSet build_frame_set(std::span<const Utterance> utterances, std::size_t context);

struct TrainingData {
  FrameSet train;
  FrameSet holdout;
  NormStats norm;  // fitted on `train` only
};

/// Featurizes the training split, holds out a seeded per-condition
/// fraction of frames, and normalizes both parts with the train stats.
TrainingData prepare_training_data(const Corpus& corpus, std::size_t context,
                                   double holdout_fraction, std::uint64_t seed);

/// Each batch holds row indices into the pool.
using Batch = std::vector<std::uint32_t>;

/// Balanced clean/noisy batches for one epoch. The larger domain is
/// shuffled and split into halves of batch_size / 2; the smaller domain is
/// cycled through fresh shuffles to fill the other half, so its frames
/// repeat. If the larger side does not divide evenly, the final batch is
/// shorter but still half clean, half noisy. With a single-domain pool
/// this throws unless `allow_single_domain`, in which case plain shuffled
/// batches of batch_size are returned.
std::vector<Batch> make_balanced_batches(std::span<const std::uint8_t> domains,
                                         std::size_t batch_size, std::uint64_t seed,
                                         std::size_t epoch, bool allow_single_domain);

/// Classical momentum, in place: v = momentum * v - lr * g; theta += v.
void sgd_momentum_step(YNetParams& params, const YNetGrads& grads, YNetGrads& velocity,
                       double learning_rate, double momentum);

enum class NewBobDecision { kKeep, kHalve, kStop };

/// Learning-rate schedule: keep the rate while holdout accuracy improves by
/// at least the start threshold, then halve every epoch until the
/// improvement drops below the stop threshold. Always stops at max_epochs.
class NewBob {
 public:
  explicit NewBob(const TrainConfig& config)
      : start_threshold_(config.newbob_start_threshold),
        stop_threshold_(config.newbob_stop_threshold),
        max_epochs_(config.max_epochs) {}

  /// Decision after the latest epoch; `history` holds one holdout accuracy
  /// per completed epoch.
  NewBobDecision next(std::span<const double> history);
  bool decaying() const { return decaying_; }

 private:
  double start_threshold_;
  double stop_threshold_;
  std::size_t max_epochs_;
  bool decaying_ = false;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double holdout_accuracy = 0.0;
  double discriminator_accuracy = 0.0;
  double learning_rate = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  YNetParams params;  // best holdout accuracy
  std::vector<EpochLog> log;
  NormStats norm;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const YNetConfig& net_config, std::uint64_t params_seed,
                  const TrainingData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

TrainResult train(const YNetConfig& net_config, std::uint64_t params_seed, const Corpus& corpus,
                  const TrainConfig& config, std::size_t context = kDefaultContext,
                  const EpochCallback& on_epoch = {});

/// Share of rows whose argmax prediction equals y. Evaluated in chunks.
double frame_accuracy(const YNetParams& params, const FrameSet& frames);

/// Appends `epoch,L1,L2,L3,holdout_acc,disc_acc,lr` rows; the header is
/// written when the file is created.
class EpochCsvWriter {
 public:
  explicit EpochCsvWriter(const std::filesystem::path& path);
  void append(const EpochLog& entry);

 private:
  std::ofstream out_;
};

}  // namespace noiseinv

#endif  // NOISEINV_TRAINER_HPP_
