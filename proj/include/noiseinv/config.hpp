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

// Run configuration in a flat, line-oriented text format:
//
//   # comment
//   corpus.seed = 7
//   training.beta = 0.5
//   network.encoder_layers = 128, 128, 128, 128
//   paths.run_dir = "runs/k1"
//
// Every key has a default; unknown keys are errors.

#ifndef NOISEINV_CONFIG_HPP_
#define NOISEINV_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "noiseinv/corpus.hpp"
#include "noiseinv/trainer.hpp"

namespace noiseinv {

/// Parse or validation failure. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }
  /// The message without the line and key prefix.
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string key_;
  std::string message_;
};

struct SweepSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  /// Empty means 1..num_conditions.
  std::vector<std::uint32_t> condition_order;
  std::size_t workers = 1;

  friend bool operator==(const SweepSettings&, const SweepSettings&) = default;
};

struct PathSettings {
  // Relative corpus and report paths resolve against run_dir.
  std::string corpus_file = "corpus.sync";
  std::string run_dir = "run";
  std::string report_file = "report.csv";

  friend bool operator==(const PathSettings&, const PathSettings&) = default;
};

struct RunConfig {
  CorpusSpec corpus;
  /// Noise conditions in the training set for generate/train/eval.
  std::vector<std::uint32_t> train_conditions = {1, 2, 3, 4, 5, 6};
  NetworkSpec network;
  /// false builds a recognizer-only network (requires training.beta = 0).
  bool discriminator = true;
  TrainConfig training;
  SweepSettings sweep;
  PathSettings paths;

  /// Cross-section checks; throws ConfigError with line 0.
  void validate() const;

  std::vector<std::uint32_t> resolved_condition_order() const;
  YNetConfig network_config() const;
  std::filesystem::path run_dir() const { return paths.run_dir; }
  std::filesystem::path corpus_path() const;
  std::filesystem::path report_path() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override on top of `config`.
void apply_override(RunConfig& config, std::string_view assignment);
void apply_overrides(RunConfig& config, std::span<const std::string> assignments);

/// Every key with its current value; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

}  // namespace noiseinv

#endif  // NOISEINV_CONFIG_HPP_
