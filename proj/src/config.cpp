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


#include "noiseinv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace noiseinv {

namespace {

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing `# comment` that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

template <typename T>
T parse_unsigned(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw BadValue("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  if (v > std::numeric_limits<T>::max()) throw BadValue("integer out of range");
  return static_cast<T>(v);
}

double parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw BadValue("expected a finite number, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw BadValue("expected true or false, got '" + std::string(s) + "'");
}

std::string parse_string(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
    if (s.find('"') != std::string_view::npos) throw BadValue("stray quote in string");
    return std::string(s);
  }
  if (s.empty() || s.find_first_of(" \t\"") != std::string_view::npos) {
    throw BadValue("expected a string, got '" + std::string(s) + "'");
  }
  return std::string(s);
}

template <typename T>
std::vector<T> parse_list(std::string_view s) {
  s = trim(s);
  std::vector<T> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_unsigned<T>(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt_real(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt_string(const std::string& s) { return "\"" + s + "\""; }

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Field>>& fields() {
  static const auto table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&t](std::string key, Field f) { t.emplace_back(std::move(key), std::move(f)); };

#define NI_UINT(KEY, EXPR, TYPE)                                                      \
  add(KEY, {[](RunConfig& c, std::string_view v) { c.EXPR = parse_unsigned<TYPE>(v); }, \
            [](const RunConfig& c) { return std::to_string(c.EXPR); }})
#define NI_REAL(KEY, EXPR)                                                   \
  add(KEY, {[](RunConfig& c, std::string_view v) { c.EXPR = parse_real(v); }, \
            [](const RunConfig& c) { return fmt_real(c.EXPR); }})

    NI_UINT("corpus.num_classes", corpus.num_classes, std::uint32_t);
    NI_UINT("corpus.base_dim", corpus.base_dim, std::uint32_t);
    NI_UINT("corpus.num_conditions", corpus.num_conditions, std::uint32_t);
    NI_UINT("corpus.seed", corpus.seed, std::uint64_t);
    NI_UINT("corpus.clean_utterances", corpus.clean_utterances, std::uint32_t);
    NI_UINT("corpus.noisy_utterances_per_condition", corpus.noisy_utterances_per_condition,
            std::uint32_t);
    NI_UINT("corpus.test_utterances_per_condition", corpus.test_utterances_per_condition,
            std::uint32_t);
    NI_UINT("corpus.frames_per_utterance", corpus.frames_per_utterance, std::uint32_t);
    NI_UINT("corpus.segment_length", corpus.segment_length, std::uint32_t);
    NI_REAL("corpus.proto_scale", corpus.proto_scale);
    NI_REAL("corpus.sigma_clean", corpus.sigma_clean);
    NI_REAL("corpus.bias_scale", corpus.bias_scale);
    NI_REAL("corpus.gain_min", corpus.gain_min);
    NI_REAL("corpus.gain_max", corpus.gain_max);
    NI_REAL("corpus.sigma_min", corpus.sigma_min);
    NI_REAL("corpus.sigma_max", corpus.sigma_max);
    NI_REAL("corpus.condition_correlation", corpus.condition_correlation);
    add("corpus.train_conditions",
        {[](RunConfig& c, std::string_view v) {
           c.train_conditions = parse_list<std::uint32_t>(v);
         },
         [](const RunConfig& c) { return fmt_list(c.train_conditions); }});

    add("network.encoder_layers",
        {[](RunConfig& c, std::string_view v) {
           c.network.encoder_layers = parse_list<std::size_t>(v);
         },
         [](const RunConfig& c) { return fmt_list(c.network.encoder_layers); }});
    add("network.recognizer_hidden",
        {[](RunConfig& c, std::string_view v) {
           c.network.recognizer_hidden = parse_list<std::size_t>(v);
         },
         [](const RunConfig& c) { return fmt_list(c.network.recognizer_hidden); }});
    // "auto" picks one layer of the default width.
    add("network.discriminator_hidden",
        {[](RunConfig& c, std::string_view v) {
           if (trim(v) == "auto") {
             c.network.discriminator_hidden.reset();
           } else {
             c.network.discriminator_hidden = parse_list<std::size_t>(v);
           }
         },
         [](const RunConfig& c) {
           return c.network.discriminator_hidden ? fmt_list(*c.network.discriminator_hidden)
                                                 : std::string("auto");
         }});
    add("network.discriminator",
        {[](RunConfig& c, std::string_view v) { c.discriminator = parse_bool(v); },
         [](const RunConfig& c) { return std::string(c.discriminator ? "true" : "false"); }});
    NI_UINT("network.context", network.context, std::size_t);

    NI_REAL("training.learning_rate", training.learning_rate);
    NI_REAL("training.momentum", training.momentum);
    NI_UINT("training.max_epochs", training.max_epochs, std::size_t);
    NI_UINT("training.batch_size", training.batch_size, std::size_t);
    NI_REAL("training.alpha", training.alpha);
    NI_REAL("training.beta", training.beta);
    NI_REAL("training.newbob_start_threshold", training.newbob_start_threshold);
    NI_REAL("training.newbob_stop_threshold", training.newbob_stop_threshold);
    NI_REAL("training.holdout_fraction", training.holdout_fraction);
    NI_UINT("training.seed", training.seed, std::uint64_t);

    add("sweep.seeds",
        {[](RunConfig& c, std::string_view v) { c.sweep.seeds = parse_list<std::uint64_t>(v); },
         [](const RunConfig& c) { return fmt_list(c.sweep.seeds); }});
    add("sweep.condition_order",
        {[](RunConfig& c, std::string_view v) {
           c.sweep.condition_order = parse_list<std::uint32_t>(v);
         },
         [](const RunConfig& c) { return fmt_list(c.sweep.condition_order); }});
    NI_UINT("sweep.workers", sweep.workers, std::size_t);

    add("paths.corpus_file",
        {[](RunConfig& c, std::string_view v) { c.paths.corpus_file = parse_string(v); },
         [](const RunConfig& c) { return fmt_string(c.paths.corpus_file); }});
    add("paths.run_dir",
        {[](RunConfig& c, std::string_view v) { c.paths.run_dir = parse_string(v); },
         [](const RunConfig& c) { return fmt_string(c.paths.run_dir); }});
    add("paths.report_file",
        {[](RunConfig& c, std::string_view v) { c.paths.report_file = parse_string(v); },
         [](const RunConfig& c) { return fmt_string(c.paths.report_file); }});
#undef NI_UINT
#undef NI_REAL
    return t;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return &f;
  }
  return nullptr;
}

// Sets one key; errors carry `line`.
void assign(RunConfig& config, std::string_view key, std::string_view value, std::size_t line) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(line, std::string(key), "unknown key");
  try {
    f->set(config, value);
  } catch (const BadValue& e) {
    throw ConfigError(line, std::string(key), e.what());
  }
}

// Splits `key = value`; throws on a line with no '='.
std::pair<std::string_view, std::string_view> split_assignment(std::string_view text,
                                                               std::size_t line) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(line, std::string(trim(text)), "expected 'section.key = value'");
  }
  const auto key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError(line, "", "missing key");
  return {key, text.substr(eq + 1)};
}

std::filesystem::path under_run_dir(const RunConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : std::filesystem::path(c.paths.run_dir) / path;
}

// Validates `config`; a failure is re-pointed at the most recent
// assignment whose field the message names.
void validate_attributed(const RunConfig& config,
                         const std::vector<std::pair<std::string, std::size_t>>& set_at) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    for (auto it = set_at.rbegin(); it != set_at.rend(); ++it) {
      const auto& [key, line] = *it;
      const auto field = key.substr(key.find('.') + 1);
      const bool same_section = key.compare(0, e.key().size(), e.key()) == 0;
      if (same_section && e.message().find(field) != std::string::npos) {
        throw ConfigError(line, key, e.message());
      }
    }
    throw;
  }
}

}  // namespace

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + message),
      line_(line),
      key_(std::move(key)),
      message_(message) {}

void RunConfig::validate() const {
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(0, key, e.what());
    }
  };
  check("corpus", [&] { corpus.validate(); });
  check("training", [&] { training.validate(); });
  check("network", [&] { (void)network_config(); });
  for (auto id : train_conditions) {
    if (id < 1 || id > corpus.num_conditions) {
      throw ConfigError(0, "corpus.train_conditions",
                        "condition " + std::to_string(id) + " outside 1.." +
                            std::to_string(corpus.num_conditions));
    }
  }
  if (std::set<std::uint32_t>(train_conditions.begin(), train_conditions.end()).size() !=
      train_conditions.size()) {
    throw ConfigError(0, "corpus.train_conditions", "duplicate condition");
  }
  if (!discriminator && training.beta != 0.0) {
    throw ConfigError(0, "training.beta", "must be 0 when network.discriminator = false");
  }
  if (sweep.seeds.empty()) throw ConfigError(0, "sweep.seeds", "no seeds");
  if (sweep.workers == 0) throw ConfigError(0, "sweep.workers", "must be at least 1");
  if (!sweep.condition_order.empty()) {
    const auto order = resolved_condition_order();
    std::set<std::uint32_t> ids(order.begin(), order.end());
    bool ok = ids.size() == corpus.num_conditions && order.size() == corpus.num_conditions;
    for (auto id : ids) ok = ok && id >= 1 && id <= corpus.num_conditions;
    if (!ok) {
      throw ConfigError(0, "sweep.condition_order",
                        "must be a permutation of 1.." + std::to_string(corpus.num_conditions));
    }
  }
  if (paths.run_dir.empty()) throw ConfigError(0, "paths.run_dir", "empty path");
}

std::vector<std::uint32_t> RunConfig::resolved_condition_order() const {
  if (!sweep.condition_order.empty()) return sweep.condition_order;
  std::vector<std::uint32_t> order(corpus.num_conditions);
  for (std::uint32_t i = 0; i < corpus.num_conditions; ++i) order[i] = i + 1;
  return order;
}

YNetConfig RunConfig::network_config() const {
  YNetConfig cfg = network.resolve(corpus.base_dim, corpus.num_classes);
  if (!discriminator) cfg.discriminator_layers.clear();
  return cfg;
}

std::filesystem::path RunConfig::corpus_path() const {
  return under_run_dir(*this, paths.corpus_file);
}

std::filesystem::path RunConfig::report_path() const {
  return under_run_dir(*this, paths.report_file);
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::vector<std::pair<std::string, std::size_t>> set_at;  // key, line
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto [key, value] = split_assignment(line, line_no);
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(line_no, std::string(key), "duplicate key");
    }
    assign(config, key, value, line_no);
    set_at.emplace_back(key, line_no);
  }
  validate_attributed(config, set_at);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "", "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto [key, value] = split_assignment(assignment, 0);
  assign(config, key, value, 0);
}

void apply_overrides(RunConfig& config, std::span<const std::string> assignments) {
  std::vector<std::pair<std::string, std::size_t>> set_at;
  for (const auto& a : assignments) {
    apply_override(config, a);
    set_at.emplace_back(std::string(split_assignment(a, 0).first), 0);
  }
  validate_attributed(config, set_at);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, f] : fields()) {
    const auto dot = name.find('.');
    const std::string s = name.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += '\n';
      section = s;
    }
    const std::string value = f.get(config);
    out += name + (value.empty() ? " =" : " = " + value) + '\n';
  }
  return out;
}

}  // namespace noiseinv
