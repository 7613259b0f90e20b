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

#include "noiseinv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "noiseinv/binary_io.hpp"
#include "noiseinv/rng.hpp"

namespace noiseinv {

namespace {

// Stream tags for keyed_stream.
enum : std::uint64_t { kPrototypeStream = 1, kConditionStream = 2, kTrainStream = 3, kTestStream = 4 };

constexpr std::string_view kCorpusMagic = "SYNC1";
constexpr std::uint32_t kMaxCount = 1u << 26;

Utterance make_utterance(const CorpusSpec& spec, const Matrix& prototypes,
                         const NoiseCondition* cond, std::mt19937_64 rng) {
  const std::size_t T = spec.frames_per_utterance;
  const std::size_t F = spec.base_dim;
  std::uniform_int_distribution<std::uint32_t> pick_class(0, spec.num_classes - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Utterance u;
  u.condition = cond == nullptr ? kCleanCondition : cond->id;
  u.frames = Matrix(T, F);
  u.labels.resize(T);
  std::uint32_t label = 0;
  std::vector<double> clean(F);
  std::vector<double> draw(F);
  for (std::size_t t = 0; t < T; ++t) {
    if (t % spec.segment_length == 0) label = pick_class(rng);
    u.labels[t] = label;
    const auto proto = prototypes.row(label);
    for (std::size_t f = 0; f < F; ++f) clean[f] = proto[f] + spec.sigma_clean * gauss(rng);
    auto dst = u.frames.row(t);
    if (cond == nullptr) {
      std::copy(clean.begin(), clean.end(), dst.begin());
    } else {
      for (double& v : draw) v = gauss(rng);
      const auto noisy = apply_condition(clean, *cond, draw);
      std::copy(noisy.begin(), noisy.end(), dst.begin());
    }
  }
  return u;
}

void put_utterances(ByteWriter& w, const std::vector<Utterance>& utts) {
  w.put_u32(static_cast<std::uint32_t>(utts.size()));
  for (const auto& u : utts) {
    w.put_u32(u.condition);
    w.put_u32(static_cast<std::uint32_t>(u.num_frames()));
    for (auto l : u.labels) w.put_u32(l);
    w.put_f64s(u.frames.values());
  }
}

std::vector<Utterance> get_utterances(ByteReader& r, std::uint32_t base_dim) {
  const std::uint32_t count = r.get_u32();
  if (count > kMaxCount) r.fail("implausible utterance count");
  std::vector<Utterance> utts;
  for (std::uint32_t i = 0; i < count; ++i) {
    Utterance u;
    u.condition = r.get_u32();
    const std::uint32_t T = r.get_u32();
    if (T == 0) r.fail("utterance " + std::to_string(i) + " has no frames");
    // Validate the declared frame count against what is left before allocating.
    r.require(static_cast<std::size_t>(T) * (4 + static_cast<std::size_t>(base_dim) * 8));
    u.labels.resize(T);
    for (auto& l : u.labels) l = r.get_u32();
    u.frames = Matrix(T, base_dim);
    r.get_f64s(u.frames.values());
    utts.push_back(std::move(u));
  }
  return utts;
}

}  // namespace

const std::vector<std::string>& default_condition_names() {
  static const std::vector<std::string> names = {"airport",    "babble", "car",
                                                 "restaurant", "street", "train"};
  return names;
}

void CorpusSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("CorpusSpec: " + m); };
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (base_dim == 0) fail("base_dim must be positive");
  if (frames_per_utterance == 0) fail("frames_per_utterance must be positive");
  if (segment_length == 0) fail("segment_length must be positive");
  if (clean_utterances == 0) fail("clean_utterances must be positive");
  if (!(proto_scale >= 0.0) || !(sigma_clean >= 0.0) || !(bias_scale >= 0.0)) {
    fail("proto_scale, sigma_clean and bias_scale must be nonnegative");
  }
  if (!(gain_min > 0.0) || !(gain_max >= gain_min)) fail("need 0 < gain_min <= gain_max");
  if (!(sigma_min >= 0.0) || !(sigma_max >= sigma_min)) fail("need 0 <= sigma_min <= sigma_max");
  if (!(condition_correlation >= 0.0 && condition_correlation <= 1.0)) {
    fail("condition_correlation must be in [0, 1]");
  }
}

const NoiseCondition& Corpus::condition(std::uint32_t id) const {
  if (id == kCleanCondition || id > conditions.size()) {
    throw std::out_of_range("no noise condition with id " + std::to_string(id));
  }
  return conditions[id - 1];
}

void Corpus::validate() const {
  if (prototypes.rows() != num_classes || prototypes.cols() != base_dim) {
    throw std::invalid_argument("Corpus: prototype table does not match class/base dimensions");
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const auto& c = conditions[i];
    if (c.id != i + 1 || c.bias.size() != base_dim || c.gain.size() != base_dim) {
      throw std::invalid_argument("Corpus: malformed condition table entry " + std::to_string(i));
    }
    for (double g : c.gain) {
      if (!(g > 0.0)) throw std::invalid_argument("Corpus: gain must be strictly positive");
    }
  }
  for (auto id : train_conditions) {
    if (id == kCleanCondition || id > conditions.size()) {
      throw std::invalid_argument("Corpus: unknown training condition " + std::to_string(id));
    }
  }
  for (const auto* split : {&train, &test}) {
    for (const auto& u : *split) {
      if (u.frames.cols() != base_dim || u.labels.size() != u.frames.rows() || u.labels.empty()) {
        throw std::invalid_argument("Corpus: utterance shape mismatch");
      }
      if (u.condition > conditions.size()) {
        throw std::invalid_argument("Corpus: utterance refers to unknown condition");
      }
      for (auto l : u.labels) {
        if (l >= num_classes) throw std::invalid_argument("Corpus: class label out of range");
      }
    }
  }
}

std::vector<NoiseCondition> make_conditions(const CorpusSpec& spec) {
  spec.validate();
  auto rng = keyed_stream(spec.seed, {kConditionStream});
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> sigma(spec.sigma_min, spec.sigma_max);
  const auto& names = default_condition_names();
  const std::size_t F = spec.base_dim;

  // Gaussian copula: correlated standard normals, mapped to the bias
  // (normal) and log-gain (uniform) marginals.
  const double rho = spec.condition_correlation;
  const double own = std::sqrt(1.0 - rho * rho);
  std::vector<double> shared_bias(F), shared_gain(F);
  for (double& v : shared_bias) v = gauss(rng);
  for (double& v : shared_gain) v = gauss(rng);
  const double log_lo = std::log(spec.gain_min);
  const double log_span = std::log(spec.gain_max) - log_lo;

  std::vector<NoiseCondition> out;
  for (std::uint32_t k = 1; k <= spec.num_conditions; ++k) {
    NoiseCondition c;
    c.id = k;
    c.name = k <= names.size() ? names[k - 1] : "noise" + std::to_string(k);
    c.bias.resize(F);
    c.gain.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
      c.bias[f] = spec.bias_scale * (rho * shared_bias[f] + own * gauss(rng));
    }
    for (std::size_t f = 0; f < F; ++f) {
      const double z = rho * shared_gain[f] + own * gauss(rng);
      const double u = 0.5 * std::erfc(-z / std::sqrt(2.0));
      c.gain[f] = std::exp(log_lo + log_span * u);
    }
    c.sigma = sigma(rng);
    out.push_back(std::move(c));
  }
  return out;
}

Corpus generate(const CorpusSpec& spec, std::span<const std::uint32_t> train_conditions) {
  spec.validate();
  for (auto id : train_conditions) {
    if (id == kCleanCondition || id > spec.num_conditions) {
      throw std::invalid_argument("generate: invalid training condition id " + std::to_string(id));
    }
  }
  Corpus c;
  c.seed = spec.seed;
  c.num_classes = spec.num_classes;
  c.base_dim = spec.base_dim;
  c.conditions = make_conditions(spec);
  c.train_conditions.assign(train_conditions.begin(), train_conditions.end());

  c.prototypes = Matrix(spec.num_classes, spec.base_dim);
  {
    auto rng = keyed_stream(spec.seed, {kPrototypeStream});
    std::normal_distribution<double> gauss(0.0, spec.proto_scale);
    for (double& v : c.prototypes.values()) v = spec.proto_scale > 0.0 ? gauss(rng) : 0.0;
  }

  for (std::uint32_t i = 0; i < spec.clean_utterances; ++i) {
    c.train.push_back(make_utterance(spec, c.prototypes, nullptr,
                                     keyed_stream(spec.seed, {kTrainStream, kCleanCondition, i})));
  }
  for (auto id : train_conditions) {
    const NoiseCondition& cond = c.conditions[id - 1];
    for (std::uint32_t i = 0; i < spec.noisy_utterances_per_condition; ++i) {
      c.train.push_back(
          make_utterance(spec, c.prototypes, &cond, keyed_stream(spec.seed, {kTrainStream, id, i})));
    }
  }
  for (std::uint32_t id = 0; id <= spec.num_conditions; ++id) {
    const NoiseCondition* cond = id == kCleanCondition ? nullptr : &c.conditions[id - 1];
    for (std::uint32_t i = 0; i < spec.test_utterances_per_condition; ++i) {
      c.test.push_back(
          make_utterance(spec, c.prototypes, cond, keyed_stream(spec.seed, {kTestStream, id, i})));
    }
  }
  return c;
}

std::vector<double> apply_condition(std::span<const double> clean_frame,
                                    const NoiseCondition& cond,
                                    std::span<const double> noise_draw) {
  const std::size_t F = clean_frame.size();
  if (cond.bias.size() != F || cond.gain.size() != F || noise_draw.size() != F) {
    throw ShapeError("apply_condition: frame of dimension " + std::to_string(F) +
                     " does not match condition or noise draw");
  }
  std::vector<double> out(F);
  for (std::size_t f = 0; f < F; ++f) {
    out[f] = cond.gain[f] * (clean_frame[f] + cond.bias[f] + cond.sigma * noise_draw[f]);
  }
  return out;
}

std::vector<std::uint8_t> serialize_corpus(const Corpus& corpus) {
  corpus.validate();
  ByteWriter w;
  w.put_magic(kCorpusMagic);
  w.put_u64(corpus.seed);
  w.put_u32(corpus.num_classes);
  w.put_u32(corpus.base_dim);
  w.put_u32(static_cast<std::uint32_t>(corpus.conditions.size()));
  for (const auto& c : corpus.conditions) {
    w.put_u32(c.id);
    w.put_string(c.name);
    w.put_f64s(c.bias);
    w.put_f64s(c.gain);
    w.put_f64(c.sigma);
  }
  w.put_u32(static_cast<std::uint32_t>(corpus.train_conditions.size()));
  for (auto id : corpus.train_conditions) w.put_u32(id);
  w.put_f64s(corpus.prototypes.values());
  put_utterances(w, corpus.train);
  put_utterances(w, corpus.test);
  return w.bytes();
}

Corpus deserialize_corpus(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "corpus");
  r.expect_magic(kCorpusMagic);
  Corpus c;
  c.seed = r.get_u64();
  c.num_classes = r.get_u32();
  c.base_dim = r.get_u32();
  if (c.num_classes < 2 || c.num_classes > kMaxCount || c.base_dim == 0 ||
      c.base_dim > kMaxCount) {
    r.fail("invalid class count or base dimension");
  }
  const std::uint32_t n_cond = r.get_u32();
  if (n_cond > 4096) r.fail("implausible condition count");
  for (std::uint32_t i = 0; i < n_cond; ++i) {
    NoiseCondition cond;
    cond.id = r.get_u32();
    cond.name = r.get_string();
    cond.bias.resize(c.base_dim);
    cond.gain.resize(c.base_dim);
    r.get_f64s(cond.bias);
    r.get_f64s(cond.gain);
    cond.sigma = r.get_f64();
    c.conditions.push_back(std::move(cond));
  }
  const std::uint32_t n_train_cond = r.get_u32();
  if (n_train_cond > n_cond) r.fail("more training conditions than conditions");
  for (std::uint32_t i = 0; i < n_train_cond; ++i) c.train_conditions.push_back(r.get_u32());
  r.require(static_cast<std::size_t>(c.num_classes) * c.base_dim * sizeof(double));
  c.prototypes = Matrix(c.num_classes, c.base_dim);
  r.get_f64s(c.prototypes.values());
  c.train = get_utterances(r, c.base_dim);
  c.test = get_utterances(r, c.base_dim);
  r.expect_end();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("corpus: ") + e.what());
  }
  return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_corpus(corpus));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return deserialize_corpus(read_file_bytes(path));
}

}  // namespace noiseinv
