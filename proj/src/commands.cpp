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


#include "noiseinv/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace noiseinv {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

// Creates the run directory and records the effective config in it.
std::filesystem::path prepare_run_dir(const RunConfig& config) {
  const auto dir = config.run_dir();
  std::filesystem::create_directories(dir);
  write_text(dir / kConfigCopyName, to_text(config));
  return dir;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string condition_name(const Corpus& corpus, std::uint32_t id) {
  return id == kCleanCondition ? std::string("clean") : corpus.condition(id).name;
}

}  // namespace

Corpus corpus_for(const RunConfig& config) {
  const auto path = config.corpus_path();
  if (std::filesystem::exists(path)) return load_corpus(path);
  return generate(config.corpus, config.train_conditions);
}

Corpus do_generate(const RunConfig& config) {
  prepare_run_dir(config);
  Corpus corpus = generate(config.corpus, config.train_conditions);
  const auto path = config.corpus_path();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_corpus(corpus, path);
  return corpus;
}

TrainResult do_train(const RunConfig& config, std::ostream* progress) {
  const auto dir = prepare_run_dir(config);
  const Corpus corpus = corpus_for(config);
  const auto log_path = dir / kEpochLogName;
  std::filesystem::remove(log_path);
  EpochCsvWriter log(log_path);
  TrainResult result = train(config.network_config(), config.training.seed, corpus,
                             config.training, config.network.context, [&](const EpochLog& e) {
                               log.append(e);
                               if (progress) {
                                 *progress << "epoch " << e.epoch << " L1 " << fixed(e.l1, 4)
                                           << " holdout_acc " << fixed(e.holdout_accuracy, 4)
                                           << " disc_acc " << fixed(e.discriminator_accuracy, 4)
                                           << " lr " << e.learning_rate << '\n';
                               }
                             });
  save_checkpoint(result.params, dir / kModelName);
  save_norm(result.norm, dir / kNormName);
  return result;
}

std::string format_eval(const std::vector<ConditionResult>& results, const Corpus& corpus) {
  std::string out = "condition,name,seen,frames,errors,error_rate\n";
  for (const auto& r : results) {
    out += std::to_string(r.condition) + ',' + condition_name(corpus, r.condition) + ',' +
           (r.seen ? "1" : "0") + ',' + std::to_string(r.frames) + ',' +
           std::to_string(r.errors) + ',' + fixed(r.frame_error_rate, 6) + '\n';
  }
  return out;
}

std::vector<ConditionResult> do_eval(const RunConfig& config, std::ostream& out) {
  const auto dir = config.run_dir();
  const Corpus corpus = corpus_for(config);
  const YNetConfig expected = config.network_config();
  const YNetParams params = load_checkpoint(dir / kModelName, &expected);
  const NormStats norm = load_norm(dir / kNormName);
  auto results = evaluate_conditions(params, norm, corpus, config.network.context);
  const std::string text = format_eval(results, corpus);
  write_text(dir / kEvalName, text);
  out << text;
  const auto agg = aggregate(results);
  out << "avg_all " << fixed(100.0 * agg.avg_all, 2) << '\n';
  return results;
}

SweepResult do_sweep(const RunConfig& config, std::ostream* progress) {
  if (!config.discriminator) {
    throw ConfigError(0, "network.discriminator", "sweep needs the discriminator branch");
  }
  const auto dir = prepare_run_dir(config);
  SweepOptions options;
  options.workers = config.sweep.workers;
  options.run_dir = dir;
  options.progress = progress;
  const auto order = config.resolved_condition_order();
  SweepResult result = run_sweep(config.corpus, config.network, config.training,
                                 config.sweep.seeds, order, options);
  emit_report(result, config.report_path());
  return result;
}

GradcheckReport do_gradcheck(const RunConfig& config, std::ostream& out) {
  GradcheckReport report = run_gradcheck(config.training.seed);
  out << "cases " << report.cases.size() << '\n'
      << "max_rel_err encoder " << report.max_encoder() << '\n'
      << "max_rel_err recognizer " << report.max_recognizer() << '\n'
      << "max_rel_err discriminator " << report.max_discriminator() << '\n'
      << "max_rel_err " << report.max_error() << " (tolerance " << kGradcheckTolerance << ")\n";
  return report;
}

int run_command(std::string_view command, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
  try {
    if (command == "generate") {
      const Corpus c = do_generate(config);
      out << "wrote " << config.corpus_path().string() << " (" << c.train.size()
          << " train, " << c.test.size() << " test utterances)\n";
    } else if (command == "train") {
      const auto r = do_train(config, &out);
      out << "best epoch " << r.best_epoch << ", wrote "
          << (config.run_dir() / kModelName).string() << '\n';
    } else if (command == "eval") {
      do_eval(config, out);
    } else if (command == "sweep") {
      const auto r = do_sweep(config, &err);
      std::size_t failed = 0;
      for (const auto& c : r.cells) failed += c.ok() ? 0 : 1;
      out << "wrote " << config.report_path().string() << '\n';
      if (failed) {
        err << failed << " sweep cell(s) failed\n";
        return kExitRuntime;
      }
    } else if (command == "gradcheck") {
      if (!do_gradcheck(config, out).passed()) {
        err << "gradcheck: relative error above " << kGradcheckTolerance << '\n';
        return kExitCheckFailed;
      }
    } else {
      err << "unknown command '" << command << "'\n";
      return kExitUsage;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace noiseinv
