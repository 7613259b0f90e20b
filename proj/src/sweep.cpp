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

#include "noiseinv/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "noiseinv/rng.hpp"

namespace noiseinv {

namespace {

std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * rate);
  return buf;
}

std::string percent(const std::optional<double>& rate) {
  return rate ? percent(*rate) : std::string();
}

std::filesystem::path cell_dir(const std::filesystem::path& root, std::size_t k, Variant v,
                               std::uint64_t seed) {
  return root / ("K" + std::to_string(k) + "_" + variant_name(v) + "_s" + std::to_string(seed));
}

void check_order(std::span<const std::uint32_t> order, std::size_t n) {
  std::set<std::uint32_t> ids(order.begin(), order.end());
  bool ok = order.size() == n && ids.size() == n;
  for (auto id : ids) ok = ok && id >= 1 && id <= n;
  if (!ok) {
    throw std::invalid_argument("condition_order must be a permutation of 1.." +
                                std::to_string(n));
  }
}

}  // namespace

const char* variant_name(Variant v) {
  return v == Variant::kInvariance ? "invariance" : "baseline";
}

const SweepCell* SweepResult::find(std::size_t k, Variant v, std::uint64_t seed) const {
  for (const auto& c : cells) {
    if (c.k == k && c.variant == v && c.seed == seed) return &c;
  }
  return nullptr;
}

double frame_error_rate(std::span<const std::uint32_t> predictions,
                        std::span<const std::uint32_t> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("frame_error_rate: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw std::invalid_argument("frame_error_rate: no frames");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predictions[i] != labels[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

std::vector<ConditionResult> evaluate_conditions(const YNetParams& params, const NormStats& norm,
                                                 const Corpus& corpus, std::size_t context) {
  std::vector<ConditionResult> results(corpus.num_conditions() + 1);
  for (std::uint32_t id = 0; id < results.size(); ++id) {
    results[id].condition = id;
    results[id].seen =
        id == kCleanCondition || std::find(corpus.train_conditions.begin(),
                                           corpus.train_conditions.end(),
                                           id) != corpus.train_conditions.end();
  }
  for (const auto& u : corpus.test) {
    Matrix feats = featurize(u.frames, context);
    apply_norm_inplace(feats, norm);
    const auto pred = predict_classes(params, feats);
    auto& r = results.at(u.condition);
    for (std::size_t t = 0; t < pred.size(); ++t) r.errors += pred[t] != u.labels[t] ? 1 : 0;
    r.frames += pred.size();
  }
  for (auto& r : results) {
    r.frame_error_rate =
        r.frames == 0 ? 0.0 : static_cast<double>(r.errors) / static_cast<double>(r.frames);
  }
  return results;
}

CellAggregates aggregate(std::span<const ConditionResult> results) {
  std::size_t all_err = 0, all_n = 0, seen_err = 0, seen_n = 0, unseen_err = 0, unseen_n = 0;
  CellAggregates a;
  for (const auto& r : results) {
    all_err += r.errors;
    all_n += r.frames;
    if (r.condition == kCleanCondition) {
      a.clean = r.frame_error_rate;
    } else if (r.seen) {
      seen_err += r.errors;
      seen_n += r.frames;
    } else {
      unseen_err += r.errors;
      unseen_n += r.frames;
    }
  }
  auto ratio = [](std::size_t e, std::size_t n) {
    return static_cast<double>(e) / static_cast<double>(n);
  };
  a.avg_all = all_n == 0 ? 0.0 : ratio(all_err, all_n);
  if (seen_n > 0) a.avg_seen = ratio(seen_err, seen_n);
  if (unseen_n > 0) a.avg_unseen = ratio(unseen_err, unseen_n);
  return a;
}

std::uint64_t sweep_corpus_seed(std::uint64_t base_seed, std::uint64_t seed) {
  return mix_seed(base_seed, seed);
}

std::vector<SweepCell> run_cell_pair(const CorpusSpec& spec, const NetworkSpec& network,
                                     const TrainConfig& config, std::uint64_t seed,
                                     std::span<const std::uint32_t> condition_order,
                                     std::size_t k, const SweepOptions& options) {
  CorpusSpec cell_spec = spec;
  cell_spec.seed = sweep_corpus_seed(spec.seed, seed);
  const std::vector<std::uint32_t> seen(condition_order.begin(),
                                        condition_order.begin() + static_cast<std::ptrdiff_t>(k));

  std::vector<SweepCell> cells;
  for (Variant v : {Variant::kInvariance, Variant::kBaseline}) {
    SweepCell c;
    c.k = k;
    c.variant = v;
    c.seed = seed;
    cells.push_back(std::move(c));
  }
  try {
    const Corpus corpus = generate(cell_spec, seen);
    const TrainingData data =
        prepare_training_data(corpus, network.context, config.holdout_fraction, seed);
    const YNetConfig net = network.resolve(corpus.base_dim, corpus.num_classes);
    for (auto& cell : cells) {
      try {
        TrainConfig cfg = config;
        cfg.seed = seed;
        cfg.beta = (cell.variant == Variant::kInvariance && k > 0) ? config.beta : 0.0;
        std::optional<EpochCsvWriter> csv;
        if (options.run_dir) {
          const auto dir = cell_dir(*options.run_dir, k, cell.variant, seed);
          std::filesystem::create_directories(dir);
          std::filesystem::remove(dir / "epochs.csv");
          csv.emplace(dir / "epochs.csv");
        }
        TrainResult trained = train(net, seed, data, cfg, [&](const EpochLog& e) {
          if (csv) csv->append(e);
        });
        cell.conditions = evaluate_conditions(trained.params, trained.norm, corpus, network.context);
        cell.aggregates = aggregate(cell.conditions);
        cell.log = std::move(trained.log);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& cell : cells) cell.error = e.what();
  }
  return cells;
}

SweepResult run_sweep(const CorpusSpec& spec, const NetworkSpec& network,
                      const TrainConfig& config, std::span<const std::uint64_t> seeds,
                      std::span<const std::uint32_t> condition_order,
                      const SweepOptions& options) {
  spec.validate();
  config.validate();
  check_order(condition_order, spec.num_conditions);
  if (seeds.empty()) throw std::invalid_argument("run_sweep: no seeds");

  struct Job {
    std::size_t k;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k <= spec.num_conditions; ++k) {
    for (auto s : seeds) jobs.push_back({k, s});
  }
  std::vector<std::vector<SweepCell>> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      outputs[j] = run_cell_pair(spec, network, config, jobs[j].seed, condition_order, jobs[j].k,
                                 options);
      if (options.progress != nullptr) {
        std::lock_guard lock(log_mutex);
        for (const auto& c : outputs[j]) {
          *options.progress << "K=" << c.k << ' ' << variant_name(c.variant) << " seed=" << c.seed;
          if (c.ok()) {
            *options.progress << " avg_all=" << percent(c.aggregates.avg_all)
                              << " unseen=" << percent(c.aggregates.avg_unseen)
                              << " epochs=" << c.log.size() << '\n';
          } else {
            *options.progress << " FAILED: " << *c.error << '\n';
          }
        }
        options.progress->flush();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, jobs.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  SweepResult result;
  result.num_conditions = spec.num_conditions;
  result.condition_order.assign(condition_order.begin(), condition_order.end());
  for (auto& out : outputs) {
    for (auto& c : out) result.cells.push_back(std::move(c));
  }
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_report(const SweepResult& result) {
  if (result.cells.empty()) throw std::invalid_argument("format_report: empty sweep result");
  std::ostringstream os;
  const std::size_t n = result.num_conditions;
  auto header = [&]() {
    os << "K,variant,seed,clean";
    for (std::size_t i = 1; i <= n; ++i) os << ",cond_" << i;
    os << ",avg_all,avg_seen,avg_unseen\n";
  };
  header();
  for (const auto& c : result.cells) {
    os << c.k << ',' << variant_name(c.variant) << ',' << c.seed;
    if (c.ok()) {
      for (const auto& r : c.conditions) os << ',' << percent(r.frame_error_rate);
      os << ',' << percent(c.aggregates.avg_all) << ',' << percent(c.aggregates.avg_seen) << ','
         << percent(c.aggregates.avg_unseen);
    } else {
      for (std::size_t i = 0; i < n + 4; ++i) os << ',';
    }
    os << '\n';
  }

  os << "\n# median over seeds\n";
  header();
  std::set<std::size_t> ks;
  for (const auto& c : result.cells) ks.insert(c.k);
  for (std::size_t k : ks) {
    for (Variant v : {Variant::kInvariance, Variant::kBaseline}) {
      std::vector<const SweepCell*> group;
      for (const auto& c : result.cells) {
        if (c.k == k && c.variant == v && c.ok()) group.push_back(&c);
      }
      if (group.empty()) continue;
      auto med = [&](auto getter) -> std::optional<double> {
        std::vector<double> vs;
        for (const auto* c : group) {
          if (auto x = getter(*c)) vs.push_back(*x);
        }
        if (vs.empty()) return std::nullopt;
        return median(std::move(vs));
      };
      os << k << ',' << variant_name(v) << ",median";
      for (std::size_t i = 0; i <= n; ++i) {
        os << ',' << percent(med([i](const SweepCell& c) -> std::optional<double> {
          return c.conditions[i].frame_error_rate;
        }));
      }
      os << ',' << percent(med([](const SweepCell& c) -> std::optional<double> {
        return c.aggregates.avg_all;
      }));
      os << ',' << percent(med([](const SweepCell& c) { return c.aggregates.avg_seen; }));
      os << ',' << percent(med([](const SweepCell& c) { return c.aggregates.avg_unseen; }));
      os << '\n';
    }
  }
  return os.str();
}

void emit_report(const SweepResult& result, const std::filesystem::path& path) {
  const std::string text = format_report(result);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

const TrendSummary::PerK* TrendSummary::at(std::size_t k) const {
  for (const auto& p : per_k) {
    if (p.k == k) return &p;
  }
  return nullptr;
}

TrendSummary summarize_trend(const SweepResult& result) {
  std::map<std::size_t, std::map<std::uint64_t, std::pair<const SweepCell*, const SweepCell*>>>
      pairs;
  for (const auto& c : result.cells) {
    if (!c.ok()) continue;
    auto& slot = pairs[c.k][c.seed];
    (c.variant == Variant::kInvariance ? slot.first : slot.second) = &c;
  }
  auto med = [](std::vector<double> v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return median(std::move(v));
  };
  TrendSummary summary;
  for (const auto& [k, by_seed] : pairs) {
    std::vector<double> ui, ub, gain, ai, ab;
    for (const auto& [seed, pair] : by_seed) {
      const auto [inv, bl] = pair;
      if (inv != nullptr) {
        ai.push_back(inv->aggregates.avg_all);
        if (inv->aggregates.avg_unseen) ui.push_back(*inv->aggregates.avg_unseen);
      }
      if (bl != nullptr) {
        ab.push_back(bl->aggregates.avg_all);
        if (bl->aggregates.avg_unseen) ub.push_back(*bl->aggregates.avg_unseen);
      }
      if (inv != nullptr && bl != nullptr && inv->aggregates.avg_unseen &&
          bl->aggregates.avg_unseen) {
        gain.push_back(*bl->aggregates.avg_unseen - *inv->aggregates.avg_unseen);
      }
    }
    TrendSummary::PerK p;
    p.k = k;
    p.median_unseen_inv = med(ui);
    p.median_unseen_bl = med(ub);
    p.median_unseen_gain = med(gain);
    p.median_all_inv = med(ai);
    p.median_all_bl = med(ab);
    summary.per_k.push_back(p);
  }
  return summary;
}

}  // namespace noiseinv
