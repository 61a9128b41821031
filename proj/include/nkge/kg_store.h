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

#ifndef NKGE_KG_STORE_H_
#define NKGE_KG_STORE_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace nkge {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Surface string <-> dense id, ids assigned in first-seen order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// Membership index over every known triple, plus the per-query answer lists
// used for filtered ranking.
class KnownIndex {
 public:
  KnownIndex() = default;
  explicit KnownIndex(std::vector<Triple> triples);

  bool contains(const Triple& t) const;
  bool contains(EntityId h, RelationId r, EntityId t) const {
    return contains(Triple{h, r, t});
  }
  std::size_t size() const { return by_head_.size(); }

  // Known tails of (h, r, ?) and heads of (?, r, t), ascending.
  std::vector<EntityId> tails(EntityId h, RelationId r) const;
  std::vector<EntityId> heads(RelationId r, EntityId t) const;

 private:
  struct Hash {
    std::size_t operator()(const Triple& t) const;
  };
  std::vector<Triple> by_head_;  // sorted by (h, r, t)
  std::vector<Triple> by_tail_;  // sorted by (r, t, h)
  std::unordered_set<Triple, Hash> members_;
};

struct LoadReport {
  // Entities/relations first seen outside train.
  std::size_t entities_unseen_in_train = 0;
  std::size_t relations_unseen_in_train = 0;
  // Valid/test triples that mention such an id.
  std::size_t triples_with_unseen_ids = 0;
};

struct KnowledgeGraph {
  std::string name;
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  KnownIndex known;
  LoadReport report;

  std::size_t entity_count() const { return entities.size(); }
  std::size_t relation_count() const { return relations.size(); }
};

// Reads train.txt, valid.txt and test.txt (head<TAB>relation<TAB>tail).
KnowledgeGraph load_dataset(const std::filesystem::path& dir);

// Builds a graph from in-memory triples of surface names; used by tests and
// synthetic fixtures.
struct NamedTriple {
  std::string head, relation, tail;
};
KnowledgeGraph make_graph(std::span<const NamedTriple> train,
                          std::span<const NamedTriple> valid = {},
                          std::span<const NamedTriple> test = {});

// Restricts the graph to the `count` entities with the largest train degree
// (ties by id), keeping only triples whose ends both survive. Ids are
// reassigned in first-seen order as if the reduced files had been loaded.
KnowledgeGraph subsample_by_degree(const KnowledgeGraph& kg,
                                   std::size_t count);

// Lowercase, split on every non-alphanumeric byte.
std::vector<std::string> tokenize(std::string_view text);

using WordId = std::uint32_t;

struct DescriptionCorpus {
  Vocabulary words;
  // Indexed by entity id; always entity_count entries.
  std::vector<std::vector<WordId>> description;  // D_e
  std::vector<std::vector<WordId>> name;         // M_e
  std::vector<bool> has_description;
  std::size_t skipped_unknown = 0;

  std::size_t missing_descriptions() const;
};

// Description lines are `entity_surface<TAB>text`. Names come from the
// optional `entity_surface<TAB>name` file, falling back to the entity's
// surface string.
DescriptionCorpus load_descriptions(
    const std::filesystem::path& path, const KnowledgeGraph& kg,
    const std::optional<std::filesystem::path>& names_path = std::nullopt);

// Builds a corpus from raw strings (names and descriptions indexed by id).
DescriptionCorpus make_corpus(std::span<const std::string> names,
                              std::span<const std::string> descriptions);

// Entity names only, no descriptions (used when no description file exists).
DescriptionCorpus empty_corpus(const KnowledgeGraph& kg);

struct CorruptionStats {
  std::vector<double> tails_per_head;
  std::vector<double> heads_per_tail;
  std::vector<double> replace_head_prob;
};

// Bernoulli corruption statistics over the train split.
CorruptionStats corruption_stats(const KnowledgeGraph& kg);

}  // namespace nkge

#endif  // NKGE_KG_STORE_H_
