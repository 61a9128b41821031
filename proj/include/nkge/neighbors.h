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

#ifndef NKGE_NEIGHBORS_H_
#define NKGE_NEIGHBORS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nkge/kg_store.h"

namespace nkge {

// Per-entity neighbor id lists, each sorted ascending and duplicate-free.
using NeighborLists = std::vector<std::vector<EntityId>>;

struct NeighborSets {
  NeighborLists topological;  // TN(e)
  NeighborLists semantic;     // SN(e)
};

// TN(e) from the train split only.
NeighborLists extract_topological(const KnowledgeGraph& kg);

struct SemanticReport {
  // Entities whose name is a single token of at most two characters; they
  // never act as a mention source.
  std::size_t excluded_short_names = 0;
  std::size_t empty_names = 0;
};

// n in SN(e) iff n != e and the name of one appears as a contiguous token run
// inside the description of the other.
NeighborLists extract_semantic(const DescriptionCorpus& corpus,
                               SemanticReport* report = nullptr);

struct NeighborFrequencies {
  std::vector<std::uint32_t> topological;  // |{e : n in TN(e)}|
  std::vector<std::uint32_t> semantic;     // |{e : n in SN(e)}|
};

NeighborFrequencies neighbor_frequency(const NeighborSets& sets);

enum class NeighborMode { kTopological, kSemantic, kBoth };
enum class Provenance : std::uint8_t { kBoth, kTopological, kSemantic };

std::string_view to_string(NeighborMode mode);
std::string_view to_string(Provenance p);
NeighborMode parse_neighbor_mode(std::string_view s);
Provenance parse_provenance(std::string_view s);

// Up to K selected neighbors per entity.
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(std::size_t entity_count, std::size_t k, NeighborMode mode);

  std::size_t entity_count() const { return counts_.size(); }
  std::size_t k() const { return k_; }
  NeighborMode mode() const { return mode_; }

  std::size_t valid_count(EntityId e) const { return counts_[e]; }
  std::span<const EntityId> ids(EntityId e) const {
    return std::span<const EntityId>(ids_).subspan(e * k_, counts_[e]);
  }
  std::span<const Provenance> flags(EntityId e) const {
    return std::span<const Provenance>(flags_).subspan(e * k_, counts_[e]);
  }

  // Appends one slot; throws when the row is full.
  void push(EntityId e, EntityId neighbor, Provenance flag);

  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

 private:
  std::size_t k_ = 0;
  NeighborMode mode_ = NeighborMode::kBoth;
  std::vector<EntityId> ids_;
  std::vector<Provenance> flags_;
  std::vector<std::uint32_t> counts_;
};

// Entries in TN ∩ SN come first (ordered by the smaller of their two
// frequencies), then the rest of TN ∪ SN ordered by the frequency in their
// own set. Ties break by ascending id. Single-set modes order that set alone.
NeighborTable select_neighbors(const NeighborSets& sets,
                               const NeighborFrequencies& freqs, std::size_t k,
                               NeighborMode mode);

// Entity counts by valid_count, buckets 0..K.
std::vector<std::size_t> neighbor_histogram(const NeighborTable& table);

// Cache file: header `K=<int> mode=<str>`, then one
// `entity_id<TAB>ids,...<TAB>flags,...` line per entity.
void write_neighbor_cache(const std::filesystem::path& path,
                          const NeighborTable& table);
NeighborTable read_neighbor_cache(const std::filesystem::path& path);

}  // namespace nkge

#endif  // NKGE_NEIGHBORS_H_
