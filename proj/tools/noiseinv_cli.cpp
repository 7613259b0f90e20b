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


// noiseinv generate|train|eval|sweep|gradcheck --config PATH
//          [--set section.key=value ...] [--out DIR]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noiseinv/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Noise-invariant Y-network training on a synthetic multi-condition corpus"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  const std::vector<std::pair<const char*, const char*>> verbs = {
      {"generate", "write the synthetic corpus"},
      {"train", "train one model; writes checkpoint, norm stats and epoch log"},
      {"eval", "score the trained model per test condition"},
      {"sweep", "run the seen-condition sweep and write the report"},
      {"gradcheck", "finite-difference check of the composite gradient"},
  };
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file (flat section.key = value)");
    sub->add_option("--set", overrides, "override applied after the file, section.key=value");
    sub->add_option("--out", out_dir, "run directory; overrides paths.run_dir");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? noiseinv::kExitOk : noiseinv::kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  noiseinv::RunConfig config;
  try {
    if (!config_path.empty()) config = noiseinv::load_config(config_path);
    if (!out_dir.empty()) overrides.push_back("paths.run_dir=\"" + out_dir + "\"");
    noiseinv::apply_overrides(config, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return noiseinv::kExitUsage;
  }
  return noiseinv::run_command(command, config, std::cout, std::cerr);
}
