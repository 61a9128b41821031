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

#ifndef NKGE_PIPELINE_H_
#define NKGE_PIPELINE_H_

#include <filesystem>
#include <ostream>
#include <string>

#include "json.hpp"
#include "nkge/config.h"
#include "nkge/kg_store.h"

namespace nkge {

// File layout under the output directory. Every name embeds the hash of the
// stage that produced it.
struct Artifacts {
  std::filesystem::path dir;
  std::string neighbor_hash, pretrain_hash, train_hash;

  std::filesystem::path neighbor_cache() const;
  std::filesystem::path neighbor_stats() const;
  std::filesystem::path pretrain_checkpoint() const;
  std::filesystem::path pretrain_log() const;
  std::filesystem::path model_checkpoint() const;
  std::filesystem::path train_log() const;
  std::filesystem::path metrics(const std::string& split, bool filtered) const;
  std::filesystem::path stats() const;
  std::filesystem::path resolved_config(const std::string& stage,
                                        const std::string& hash) const;

  std::string neighbor_cache_override;
};

Artifacts artifacts_for(const RunConfig& config);

// Exclusive marker file; construction fails when another run holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

KnowledgeGraph load_graph(const RunConfig& config);

void cmd_preprocess(const RunConfig& config, std::ostream& out);
void cmd_pretrain(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
nlohmann::json cmd_eval(const RunConfig& config, std::ostream& out,
                        bool filtered = true);
nlohmann::json cmd_stats(const RunConfig& config, std::ostream& out);

}  // namespace nkge

#endif  // NKGE_PIPELINE_H_
