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

#include "noiseinv/trainer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "noiseinv/rng.hpp"

namespace noiseinv {

namespace {

enum : std::uint64_t { kHoldoutStream = 11, kBatchStream = 12 };

constexpr std::size_t kEvalChunk = 2048;

FrameSet subset(const FrameSet& all, std::span<const std::uint32_t> rows) {
  FrameSet out;
  const std::size_t D = all.features.cols();
  out.features = Matrix(rows.size(), D);
  out.y.reserve(rows.size());
  out.d.reserve(rows.size());
  out.condition.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = all.features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.y.push_back(all.y[rows[i]]);
    out.d.push_back(all.d[rows[i]]);
    out.condition.push_back(all.condition[rows[i]]);
  }
  return out;
}

Matrix gather_rows(const Matrix& source, std::span<const std::uint32_t> rows) {
  Matrix out(rows.size(), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = source.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix row_range(const Matrix& source, std::size_t begin, std::size_t end) {
  Matrix out(end - begin, source.cols());
  std::copy(source.values().begin() + static_cast<std::ptrdiff_t>(begin * source.cols()),
            source.values().begin() + static_cast<std::ptrdiff_t>(end * source.cols()),
            out.values().begin());
  return out;
}

void step_stack(std::vector<AffineLayer>& params, const std::vector<AffineLayer>& grads,
                std::vector<AffineLayer>& velocity, double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeError("sgd_momentum_step: parameter and gradient layer counts differ");
  }
  auto update = [lr, momentum](Matrix& p, const Matrix& g, Matrix& v) {
    if (p.size() != g.size() || p.size() != v.size()) {
      throw ShapeError("sgd_momentum_step: shape mismatch " + p.shape_string() + " vs " +
                       g.shape_string());
    }
    auto pv = p.values();
    auto gv = g.values();
    auto vv = v.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      vv[i] = momentum * vv[i] - lr * gv[i];
      pv[i] += vv[i];
    }
  };
  for (std::size_t k = 0; k < params.size(); ++k) {
    update(params[k].weights, grads[k].weights, velocity[k].weights);
    update(params[k].biases, grads[k].biases, velocity[k].biases);
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("TrainConfig: " + m); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (max_epochs == 0) fail("max_epochs must be positive");
  if (batch_size < 2 || batch_size % 2 != 0) fail("batch_size must be even and at least 2");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) fail("alpha and beta must be nonnegative");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 0.5)) {
    fail("holdout_fraction must be in (0, 0.5)");
  }
}

YNetConfig NetworkSpec::resolve(std::size_t base_dim, std::size_t num_classes) const {
  return make_ynet_config(featurized_dim(base_dim, context), num_classes, encoder_layers,
                          recognizer_hidden, discriminator_hidden);
}

FrameSet build_frame_set(std::span<const Utterance> utterances, std::size_t context) {
  std::size_t total = 0;
  for (const auto& u : utterances) total += u.num_frames();
  FrameSet out;
  if (utterances.empty()) return out;
  const std::size_t D = featurized_dim(utterances.front().frames.cols(), context);
  out.features = Matrix(total, D);
  out.y.reserve(total);
  out.d.reserve(total);
  out.condition.reserve(total);
  std::size_t row = 0;
  for (const auto& u : utterances) {
    const Matrix feats = featurize(u.frames, context);
    std::copy(feats.values().begin(), feats.values().end(),
              out.features.values().begin() + static_cast<std::ptrdiff_t>(row * D));
    row += feats.rows();
    out.y.insert(out.y.end(), u.labels.begin(), u.labels.end());
    out.d.insert(out.d.end(), u.num_frames(), u.condition == kCleanCondition ? 0 : 1);
    out.condition.insert(out.condition.end(), u.num_frames(), u.condition);
  }
  return out;
}

TrainingData prepare_training_data(const Corpus& corpus, std::size_t context,
                                   double holdout_fraction, std::uint64_t seed) {
  if (corpus.train.empty()) throw std::invalid_argument("prepare_training_data: no training data");
  FrameSet all = build_frame_set(corpus.train, context);

  std::map<std::uint32_t, std::vector<std::uint32_t>> by_condition;
  for (std::uint32_t i = 0; i < all.size(); ++i) by_condition[all.condition[i]].push_back(i);

  std::vector<std::uint32_t> train_rows;
  std::vector<std::uint32_t> holdout_rows;
  for (auto& [cond, rows] : by_condition) {
    auto rng = keyed_stream(seed, {kHoldoutStream, cond});
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_hold = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(rows.size())));
    holdout_rows.insert(holdout_rows.end(), rows.begin(),
                        rows.begin() + static_cast<std::ptrdiff_t>(n_hold));
    train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_hold),
                      rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(holdout_rows.begin(), holdout_rows.end());

  TrainingData data;
  data.train = subset(all, train_rows);
  data.holdout = subset(all, holdout_rows);
  all = FrameSet{};
  data.norm = fit_norm(data.train.features);
  apply_norm_inplace(data.train.features, data.norm);
  if (data.holdout.size() > 0) apply_norm_inplace(data.holdout.features, data.norm);
  return data;
}

std::vector<Batch> make_balanced_batches(std::span<const std::uint8_t> domains,
                                         std::size_t batch_size, std::uint64_t seed,
                                         std::size_t epoch, bool allow_single_domain) {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw std::invalid_argument("make_balanced_batches: batch_size must be even");
  }
  std::vector<std::uint32_t> clean;
  std::vector<std::uint32_t> noisy;
  for (std::uint32_t i = 0; i < domains.size(); ++i) (domains[i] ? noisy : clean).push_back(i);

  auto rng = keyed_stream(seed, {kBatchStream, epoch});
  std::vector<Batch> batches;

  if (clean.empty() || noisy.empty()) {
    if (!allow_single_domain) {
      throw TrainingError(
          "make_balanced_batches: pool has a single domain; the adversarial term needs both "
          "clean and noisy frames");
    }
    std::vector<std::uint32_t> pool = clean.empty() ? noisy : clean;
    if (pool.empty()) throw TrainingError("make_balanced_batches: empty pool");
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t at = 0; at < pool.size(); at += batch_size) {
      const std::size_t end = std::min(pool.size(), at + batch_size);
      batches.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(at),
                           pool.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
  }

  const bool clean_major = clean.size() >= noisy.size();
  std::vector<std::uint32_t>& major = clean_major ? clean : noisy;
  std::vector<std::uint32_t>& minor = clean_major ? noisy : clean;
  std::shuffle(major.begin(), major.end(), rng);

  const std::size_t half = batch_size / 2;
  std::vector<std::uint32_t> minor_order;
  std::size_t minor_pos = 0;
  auto next_minor = [&]() {
    if (minor_pos == minor_order.size()) {
      minor_order = minor;
      std::shuffle(minor_order.begin(), minor_order.end(), rng);
      minor_pos = 0;
    }
    return minor_order[minor_pos++];
  };

  for (std::size_t at = 0; at < major.size(); at += half) {
    const std::size_t take = std::min(half, major.size() - at);
    Batch b;
    b.reserve(2 * take);
    std::vector<std::uint32_t> side(major.begin() + static_cast<std::ptrdiff_t>(at),
                                    major.begin() + static_cast<std::ptrdiff_t>(at + take));
    std::vector<std::uint32_t> other(take);
    for (auto& v : other) v = next_minor();
    // Clean half first, then noisy half.
    const auto& first = clean_major ? side : other;
    const auto& second = clean_major ? other : side;
    b.insert(b.end(), first.begin(), first.end());
    b.insert(b.end(), second.begin(), second.end());
    batches.push_back(std::move(b));
  }
  return batches;
}

void sgd_momentum_step(YNetParams& params, const YNetGrads& grads, YNetGrads& velocity,
                       double learning_rate, double momentum) {
  step_stack(params.encoder, grads.encoder, velocity.encoder, learning_rate, momentum);
  step_stack(params.recognizer, grads.recognizer, velocity.recognizer, learning_rate, momentum);
  step_stack(params.discriminator, grads.discriminator, velocity.discriminator, learning_rate,
             momentum);
}

NewBobDecision NewBob::next(std::span<const double> history) {
  if (history.empty()) throw std::invalid_argument("NewBob::next: empty history");
  if (history.size() >= max_epochs_) return NewBobDecision::kStop;
  if (history.size() < 2) return decaying_ ? NewBobDecision::kHalve : NewBobDecision::kKeep;
  const double improvement = history[history.size() - 1] - history[history.size() - 2];
  if (decaying_) {
    return improvement < stop_threshold_ ? NewBobDecision::kStop : NewBobDecision::kHalve;
  }
  if (improvement < start_threshold_) {
    decaying_ = true;
    return NewBobDecision::kHalve;
  }
  return NewBobDecision::kKeep;
}

double frame_accuracy(const YNetParams& params, const FrameSet& frames) {
  if (frames.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t at = 0; at < frames.size(); at += kEvalChunk) {
    const std::size_t end = std::min(frames.size(), at + kEvalChunk);
    const auto pred = predict_classes(params, row_range(frames.features, at, end));
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == frames.y[at + i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(frames.size());
}

namespace {

double holdout_discriminator_accuracy(const YNetParams& params, const FrameSet& frames) {
  if (params.discriminator.empty() || frames.size() == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::size_t hits = 0;
  for (std::size_t at = 0; at < frames.size(); at += kEvalChunk) {
    const std::size_t end = std::min(frames.size(), at + kEvalChunk);
    const ForwardTrace t = forward(params, row_range(frames.features, at, end));
    const std::span<const std::uint8_t> d(frames.d.data() + at, end - at);
    hits += static_cast<std::size_t>(std::llround(discriminator_accuracy(t.d_hat, d) *
                                                  static_cast<double>(end - at)));
  }
  return static_cast<double>(hits) / static_cast<double>(frames.size());
}

}  // namespace

TrainResult train(const YNetConfig& net_config, std::uint64_t params_seed,
                  const TrainingData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  net_config.validate();
  if (data.train.size() == 0) throw std::invalid_argument("train: empty training set");
  if (data.train.features.cols() != net_config.input_dim) {
    throw ShapeError("train: features have " + std::to_string(data.train.features.cols()) +
                     " columns but the network expects " + std::to_string(net_config.input_dim));
  }
  if (!net_config.has_discriminator() && config.beta > 0.0) {
    throw std::invalid_argument("train: beta > 0 needs a discriminator branch");
  }

  YNetParams params = init_params(net_config, params_seed);
  YNetGrads velocity = YNetGrads::zeros_like(params);
  NewBob schedule(config);
  double lr = config.learning_rate;

  TrainResult result;
  result.norm = data.norm;
  result.params = params;
  double best = -1.0;
  std::vector<double> history;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches =
        make_balanced_batches(data.train.d, config.batch_size, config.seed, epoch,
                              config.beta == 0.0);
    double sum_l1 = 0.0, sum_l2 = 0.0, sum_l3 = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Batch& rows = batches[b];
      BatchLabels labels;
      labels.y.reserve(rows.size());
      labels.d.reserve(rows.size());
      for (auto r : rows) {
        labels.y.push_back(data.train.y[r]);
        labels.d.push_back(data.train.d[r]);
      }
#ifndef NDEBUG
      {
        const auto noisy = std::count(labels.d.begin(), labels.d.end(), 1);
        const bool single = noisy == 0 || static_cast<std::size_t>(noisy) == labels.d.size();
        assert(single || static_cast<std::size_t>(noisy) * 2 == labels.d.size());
      }
#endif
      const ForwardTrace trace = forward(params, gather_rows(data.train.features, rows));
      const LossTerms losses = compute_losses(trace, labels);
      if (!std::isfinite(losses.l1) || !std::isfinite(losses.l2) || !std::isfinite(losses.l3)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << b + 1 << " (L1=" << losses.l1
            << ", L2=" << losses.l2 << ", L3=" << losses.l3 << ")";
        throw TrainingError(msg.str());
      }
      const auto n = static_cast<double>(rows.size());
      sum_l1 += losses.l1 * n;
      sum_l2 += losses.l2 * n;
      sum_l3 += losses.l3 * n;
      seen += rows.size();
      const YNetGrads grads = composite_backward(params, trace, labels, config.alpha, config.beta);
      sgd_momentum_step(params, grads, velocity, lr, config.momentum);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.l1 = sum_l1 / static_cast<double>(seen);
    entry.l2 = sum_l2 / static_cast<double>(seen);
    entry.l3 = sum_l3 / static_cast<double>(seen);
    const FrameSet& eval = data.holdout.size() > 0 ? data.holdout : data.train;
    entry.holdout_accuracy = frame_accuracy(params, eval);
    entry.discriminator_accuracy = holdout_discriminator_accuracy(params, eval);
    entry.learning_rate = lr;
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (entry.holdout_accuracy > best) {
      best = entry.holdout_accuracy;
      result.params = params;
      result.best_epoch = epoch;
    }
    history.push_back(entry.holdout_accuracy);
    const NewBobDecision decision = schedule.next(history);
    if (decision == NewBobDecision::kStop) break;
    if (decision == NewBobDecision::kHalve) lr *= 0.5;
  }
  return result;
}

TrainResult train(const YNetConfig& net_config, std::uint64_t params_seed, const Corpus& corpus,
                  const TrainConfig& config, std::size_t context, const EpochCallback& on_epoch) {
  config.validate();
  const TrainingData data =
      prepare_training_data(corpus, context, config.holdout_fraction, config.seed);
  return train(net_config, params_seed, data, config, on_epoch);
}

EpochCsvWriter::EpochCsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << "epoch,L1,L2,L3,holdout_acc,disc_acc,lr\n";
  out_.flush();
}

void EpochCsvWriter::append(const EpochLog& e) {
  out_ << e.epoch << ',' << std::setprecision(10) << e.l1 << ',' << e.l2 << ',' << e.l3 << ','
       << e.holdout_accuracy << ',';
  if (std::isfinite(e.discriminator_accuracy)) out_ << e.discriminator_accuracy;
  out_ << ',' << e.learning_rate << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("failed to append epoch log");
}

}  // namespace noiseinv
