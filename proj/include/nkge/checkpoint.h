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

#ifndef NKGE_CHECKPOINT_H_
#define NKGE_CHECKPOINT_H_

// Binary checkpoint format (little-endian):
//
//   magic    8 bytes  "NKGECKPT"
//   version  u32      kCheckpointVersion
//   tag      u32 length + bytes   (free-form, e.g. the config hash)
//   count    u32      number of parameters
//   per parameter:
//     name   u32 length + bytes
//     ndim   u32, then ndim x u64 dimensions
//     data   product(dims) x f32

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nkge/params.h"

namespace nkge {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> value;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string tag;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path,
                     const ParamRegistry<float>& registry,
                     const std::string& tag);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every tensor whose name exists in the registry with the same shape.
// Returns the names that were restored.
std::vector<std::string> restore_matching(const Checkpoint& checkpoint,
                                          ParamRegistry<float>& registry);

}  // namespace nkge

#endif  // NKGE_CHECKPOINT_H_
