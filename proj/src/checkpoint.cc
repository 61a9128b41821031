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

#include "nkge/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "nkge/errors.h"

namespace nkge {
namespace {

constexpr char kMagic[8] = {'N', 'K', 'G', 'E', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

template <typename U>
void write_pod(std::ofstream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename U>
U read_pod(std::ifstream& in, const std::filesystem::path& path) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!in) throw DataError("truncated checkpoint: " + path.string());
  return v;
}

std::string read_string(std::ifstream& in, const std::filesystem::path& path) {
  const auto n = read_pod<std::uint32_t>(in, path);
  if (n > (1u << 20)) throw DataError("corrupt checkpoint: " + path.string());
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("truncated checkpoint: " + path.string());
  return s;
}

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path,
                     const ParamRegistry<float>& registry,
                     const std::string& tag) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kCheckpointVersion);
  write_string(out, tag);
  write_pod(out, static_cast<std::uint32_t>(registry.size()));
  for (const auto& p : registry) {
    write_string(out, p.name);
    write_pod(out, static_cast<std::uint32_t>(p.value.shape().size()));
    for (const auto dim : p.value.shape()) {
      write_pod(out, static_cast<std::uint64_t>(dim));
    }
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file: " + path.string());
  }
  Checkpoint ck;
  ck.version = read_pod<std::uint32_t>(in, path);
  if (ck.version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " +
                    std::to_string(ck.version) + ": " + path.string());
  }
  ck.tag = read_string(in, path);
  const auto count = read_pod<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = read_string(in, path);
    const auto ndim = read_pod<std::uint32_t>(in, path);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = read_pod<std::uint64_t>(in, path);
    t.value = Tensor<float>(shape);
    in.read(reinterpret_cast<char*>(t.value.data()),
            static_cast<std::streamsize>(t.value.size() * sizeof(float)));
    if (!in) throw DataError("truncated checkpoint: " + path.string());
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

std::vector<std::string> restore_matching(const Checkpoint& checkpoint,
                                          ParamRegistry<float>& registry) {
  std::vector<std::string> restored;
  for (auto& p : registry) {
    const NamedTensor* t = checkpoint.find(p.name);
    if (t == nullptr || t->value.shape() != p.value.shape()) continue;
    std::copy(t->value.values().begin(), t->value.values().end(),
              p.value.values().begin());
    restored.push_back(p.name);
  }
  return restored;
}

}  // namespace nkge
