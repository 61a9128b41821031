// Copyright 2026 The NKGE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nkge/config.h"
#include "nkge/errors.h"
#include "nkge/pipeline.h"

namespace {

nkge::RunConfig load(const std::string& config_path,
                     const std::vector<std::string>& overrides,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<std::size_t>& threads) {
  nkge::KeyValues kv;
  if (!config_path.empty()) kv = nkge::read_config_file(config_path);
  for (const std::string& s : overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw nkge::ConfigError("--set expects key=value, got '" + s + "'");
    }
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (seed) kv["seed"] = std::to_string(*seed);
  if (threads) kv["threads"] = std::to_string(*threads);
  return nkge::resolve_config(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood-enhanced knowledge graph embedding"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool raw = false;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--set", overrides, "override a config key (key=value)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads,
                 "evaluation threads (0 = deterministic single-threaded)");
  auto* preprocess = app.add_subcommand("preprocess", "build the neighbor cache");
  auto* pretrain = app.add_subcommand("pretrain", "train plain TransE");
  auto* train = app.add_subcommand("train", "train the model");
  auto* eval = app.add_subcommand("eval", "filtered link prediction");
  eval->add_flag("--raw", raw, "unfiltered ranking");
  auto* stats = app.add_subcommand("stats", "dataset and neighbor statistics");
  for (auto* sub : {preprocess, pretrain, train, eval, stats}) {
    sub->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(nkge::ExitCode::kUsage);
  }
  try {
    const nkge::RunConfig config = load(config_path, overrides, seed, threads);
    if (*preprocess) nkge::cmd_preprocess(config, std::cout);
    if (*pretrain) nkge::cmd_pretrain(config, std::cout);
    if (*train) nkge::cmd_train(config, std::cout);
    if (*eval) nkge::cmd_eval(config, std::cout, !raw);
    if (*stats) nkge::cmd_stats(config, std::cout);
  } catch (const nkge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(nkge::ExitCode::kData);
  }
  return 0;
}
