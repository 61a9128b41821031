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

#ifndef NKGE_CONFIG_H_
#define NKGE_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "nkge/trainer.h"

namespace nkge {

using KeyValues = std::map<std::string, std::string>;

// Flat `key = value` lines; blank lines and `#` comments are ignored.
KeyValues parse_key_values(std::string_view text, std::string_view source);

// Reads a config file. Relative dataset/description/output paths are resolved
// against the file's directory.
KeyValues read_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::string dataset;
  std::string descriptions;  // optional
  std::string names;         // optional
  std::string output = "out";
  std::string neighbor_cache;  // optional override
  std::size_t subsample_entities = 0;
  std::string eval_split = "test";
  TrainConfig train;
};

// Applies `kv` over the defaults of its variant. Unknown keys and malformed
// values are ConfigErrors.
RunConfig resolve_config(const KeyValues& kv);

KeyValues to_key_values(const RunConfig& config);
std::string format_config(const RunConfig& config);

enum class Stage { kNeighbors, kPretrain, kTrain };

// 16 hex digits of FNV-1a over the keys that determine the stage's output.
std::string stage_hash(const RunConfig& config, Stage stage);

}  // namespace nkge

#endif  // NKGE_CONFIG_H_
