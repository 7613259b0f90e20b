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

// Noise-count sweep: for K = 0..N seen conditions (added in a fixed order)
// train the baseline (beta = 0) and the invariance model on the same corpus
// and initialization, then score frame error per test condition.

#ifndef NOISEINV_SWEEP_HPP_
#define NOISEINV_SWEEP_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "noiseinv/corpus.hpp"
#include "noiseinv/trainer.hpp"

namespace noiseinv {

enum class Variant { kInvariance, kBaseline };

const char* variant_name(Variant v);

struct ConditionResult {
  std::uint32_t condition = 0;  // 0 = clean
  double frame_error_rate = 0.0;
  std::size_t errors = 0;
  std::size_t frames = 0;
  bool seen = false;
};

struct CellAggregates {
  double avg_all = 0.0;
  std::optional<double> avg_seen;    // noise conditions in training; absent at K = 0
  std::optional<double> avg_unseen;  // absent at K = N
  double clean = 0.0;
};

struct SweepCell {
  std::size_t k = 0;
  Variant variant = Variant::kInvariance;
  std::uint64_t seed = 0;
  std::vector<ConditionResult> conditions;  // clean first, then ids 1..N
  CellAggregates aggregates;
  std::vector<EpochLog> log;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

struct SweepResult {
  std::size_t num_conditions = 0;
  std::vector<std::uint32_t> condition_order;
  std::vector<SweepCell> cells;  // ordered by (K, seed, variant)

  const SweepCell* find(std::size_t k, Variant v, std::uint64_t seed) const;
};

/// Fraction of positions where prediction and label differ.
double frame_error_rate(std::span<const std::uint32_t> predictions,
                        std::span<const std::uint32_t> labels);

/// Scores every test utterance group of `corpus` with `params`.
std::vector<ConditionResult> evaluate_conditions(const YNetParams& params, const NormStats& norm,
                                                 const Corpus& corpus, std::size_t context);

/// Frame-weighted aggregates. Clean counts towards avg_all only.
CellAggregates aggregate(std::span<const ConditionResult> results);

struct SweepOptions {
  std::size_t workers = 1;
  /// When set, per-cell epoch logs go to run_dir/K{K}_{variant}_s{seed}/.
  std::optional<std::filesystem::path> run_dir;
  /// Progress lines; may be null.
  std::ostream* progress = nullptr;
};

/// Corpus seed used for sweep seed `seed`.
std::uint64_t sweep_corpus_seed(std::uint64_t base_seed, std::uint64_t seed);

/// Runs one (K, seed) cell pair. The invariance variant trains with
/// config.beta and the baseline with beta = 0. With K = 0 there are no noisy
/// training frames, so both variants train with beta = 0.
std::vector<SweepCell> run_cell_pair(const CorpusSpec& spec, const NetworkSpec& network,
                                     const TrainConfig& config, std::uint64_t seed,
                                     std::span<const std::uint32_t> condition_order,
                                     std::size_t k, const SweepOptions& options = {});

SweepResult run_sweep(const CorpusSpec& spec, const NetworkSpec& network,
                      const TrainConfig& config, std::span<const std::uint64_t> seeds,
                      std::span<const std::uint32_t> condition_order,
                      const SweepOptions& options = {});

/// Per-seed rows followed by a seed-median block, values in percent.
std::string format_report(const SweepResult& result);
void emit_report(const SweepResult& result, const std::filesystem::path& path);

/// Seed statistics backing the seen/unseen trend comparison.
struct TrendSummary {
  struct PerK {
    std::size_t k = 0;
    std::optional<double> median_unseen_inv;
    std::optional<double> median_unseen_bl;
    std::optional<double> median_unseen_gain;  // median over seeds of (bl - inv)
    std::optional<double> median_all_inv;
    std::optional<double> median_all_bl;
  };
  std::vector<PerK> per_k;

  const PerK* at(std::size_t k) const;
};

TrendSummary summarize_trend(const SweepResult& result);

double median(std::vector<double> values);

}  // namespace noiseinv

#endif  // NOISEINV_SWEEP_HPP_
