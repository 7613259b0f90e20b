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


// The CLI verbs as library calls. run_command() maps failures onto exit
// codes; the do_* functions throw and return their results for callers
// that want them directly.

#ifndef NOISEINV_COMMANDS_HPP_
#define NOISEINV_COMMANDS_HPP_

#include <filesystem>
#include <ostream>
#include <string_view>
#include <vector>

#include "noiseinv/config.hpp"
#include "noiseinv/gradcheck.hpp"
#include "noiseinv/sweep.hpp"

namespace noiseinv {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRuntime = 2,
  kExitCheckFailed = 3,
};

// Files written under the run directory.
inline constexpr const char* kConfigCopyName = "config.txt";
inline constexpr const char* kModelName = "model.ynet";
inline constexpr const char* kNormName = "norm.bin";
inline constexpr const char* kEpochLogName = "epochs.csv";
inline constexpr const char* kEvalName = "eval.csv";

/// The corpus file when it exists, otherwise a freshly generated corpus.
Corpus corpus_for(const RunConfig& config);

Corpus do_generate(const RunConfig& config);
TrainResult do_train(const RunConfig& config, std::ostream* progress = nullptr);
std::vector<ConditionResult> do_eval(const RunConfig& config, std::ostream& out);
SweepResult do_sweep(const RunConfig& config, std::ostream* progress = nullptr);
GradcheckReport do_gradcheck(const RunConfig& config, std::ostream& out);

/// Per-condition rates as CSV: condition,name,seen,frames,errors,error_rate.
std::string format_eval(const std::vector<ConditionResult>& results, const Corpus& corpus);

/// Runs one verb; diagnostics go to `err`. Unknown verbs return kExitUsage.
int run_command(std::string_view command, const RunConfig& config, std::ostream& out,
                std::ostream& err);

}  // namespace noiseinv

#endif  // NOISEINV_COMMANDS_HPP_
