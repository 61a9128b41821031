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

#include "nkge/neighbors.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "nkge/errors.h"

namespace nkge {
namespace {

void sort_unique(std::vector<EntityId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Token trie over entity names.
class NameTrie {
 public:
  NameTrie() : nodes_(1) {}

  void insert(std::span<const WordId> name, EntityId e) {
    std::uint32_t node = 0;
    for (const WordId w : name) {
      auto [it, inserted] = nodes_[node].children.try_emplace(
          w, static_cast<std::uint32_t>(nodes_.size()));
      const std::uint32_t next = it->second;
      if (inserted) nodes_.emplace_back();
      node = next;
    }
    nodes_[node].entities.push_back(e);
  }

  // Calls fn(entity) for every name that occurs starting at text[start].
  template <typename Fn>
  void match_at(std::span<const WordId> text, std::size_t start,
                Fn&& fn) const {
    std::uint32_t node = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
      auto it = nodes_[node].children.find(text[i]);
      if (it == nodes_[node].children.end()) return;
      node = it->second;
      for (const EntityId e : nodes_[node].entities) fn(e);
    }
  }

 private:
  struct Node {
    std::unordered_map<WordId, std::uint32_t> children;
    std::vector<EntityId> entities;
  };
  std::vector<Node> nodes_;
};

}  // namespace

NeighborLists extract_topological(const KnowledgeGraph& kg) {
  NeighborLists tn(kg.entity_count());
  for (const auto& t : kg.train) {
    tn[t.head].push_back(t.tail);
    tn[t.tail].push_back(t.head);
  }
  for (auto& v : tn) sort_unique(v);
  return tn;
}

NeighborLists extract_semantic(const DescriptionCorpus& corpus,
                               SemanticReport* report) {
  const std::size_t n = corpus.name.size();
  SemanticReport local;
  NameTrie trie;
  for (EntityId e = 0; e < n; ++e) {
    const auto& name = corpus.name[e];
    if (name.empty()) {
      ++local.empty_names;
      continue;
    }
    if (name.size() == 1 && corpus.words.name(name[0]).size() <= 2) {
      ++local.excluded_short_names;
      continue;
    }
    trie.insert(name, e);
  }
  NeighborLists sn(n);
  for (EntityId d = 0; d < n; ++d) {
    const auto& text = corpus.description[d];
    for (std::size_t i = 0; i < text.size(); ++i) {
      trie.match_at(text, i, [&](EntityId mentioned) {
        if (mentioned == d) return;
        sn[d].push_back(mentioned);
        sn[mentioned].push_back(d);
      });
    }
  }
  for (auto& v : sn) sort_unique(v);
  if (report != nullptr) *report = local;
  return sn;
}

NeighborFrequencies neighbor_frequency(const NeighborSets& sets) {
  const std::size_t n = std::max(sets.topological.size(), sets.semantic.size());
  NeighborFrequencies f;
  f.topological.assign(n, 0);
  f.semantic.assign(n, 0);
  for (const auto& list : sets.topological) {
    for (const EntityId m : list) ++f.topological[m];
  }
  for (const auto& list : sets.semantic) {
    for (const EntityId m : list) ++f.semantic[m];
  }
  return f;
}

std::string_view to_string(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::kTopological:
      return "topological";
    case NeighborMode::kSemantic:
      return "semantic";
    case NeighborMode::kBoth:
      return "both";
  }
  return "both";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kTopological:
      return "topological";
    case Provenance::kSemantic:
      return "semantic";
    case Provenance::kBoth:
      return "both";
  }
  return "both";
}

NeighborMode parse_neighbor_mode(std::string_view s) {
  if (s == "topological") return NeighborMode::kTopological;
  if (s == "semantic") return NeighborMode::kSemantic;
  if (s == "both") return NeighborMode::kBoth;
  throw ConfigError("unknown neighbor mode: " + std::string(s));
}

Provenance parse_provenance(std::string_view s) {
  if (s == "topological") return Provenance::kTopological;
  if (s == "semantic") return Provenance::kSemantic;
  if (s == "both") return Provenance::kBoth;
  throw DataError("unknown provenance flag: " + std::string(s));
}

NeighborTable::NeighborTable(std::size_t entity_count, std::size_t k,
                             NeighborMode mode)
    : k_(k),
      mode_(mode),
      ids_(entity_count * k, 0),
      flags_(entity_count * k, Provenance::kBoth),
      counts_(entity_count, 0) {
  if (k == 0) throw ConfigError("neighbor count K must be at least 1");
}

void NeighborTable::push(EntityId e, EntityId neighbor, Provenance flag) {
  if (counts_[e] >= k_) throw DataError("neighbor row overflow");
  ids_[e * k_ + counts_[e]] = neighbor;
  flags_[e * k_ + counts_[e]] = flag;
  ++counts_[e];
}

NeighborTable select_neighbors(const NeighborSets& sets,
                               const NeighborFrequencies& freqs, std::size_t k,
                               NeighborMode mode) {
  const std::size_t n = std::max(sets.topological.size(), sets.semantic.size());
  NeighborTable table(n, k, mode);
  static const std::vector<EntityId> kEmpty;

  struct Candidate {
    std::uint32_t freq;
    EntityId id;
    Provenance flag;
    bool operator<(const Candidate& o) const {
      return freq != o.freq ? freq < o.freq : id < o.id;
    }
  };
  std::vector<Candidate> first, rest;
  for (EntityId e = 0; e < n; ++e) {
    const auto& tn = e < sets.topological.size() ? sets.topological[e] : kEmpty;
    const auto& sn = e < sets.semantic.size() ? sets.semantic[e] : kEmpty;
    first.clear();
    rest.clear();
    if (mode == NeighborMode::kTopological) {
      for (const EntityId m : tn) {
        rest.push_back({freqs.topological[m], m, Provenance::kTopological});
      }
    } else if (mode == NeighborMode::kSemantic) {
      for (const EntityId m : sn) {
        rest.push_back({freqs.semantic[m], m, Provenance::kSemantic});
      }
    } else {
      // Merge the two sorted lists.
      std::size_t i = 0, j = 0;
      while (i < tn.size() || j < sn.size()) {
        if (j == sn.size() || (i < tn.size() && tn[i] < sn[j])) {
          rest.push_back(
              {freqs.topological[tn[i]], tn[i], Provenance::kTopological});
          ++i;
        } else if (i == tn.size() || sn[j] < tn[i]) {
          rest.push_back({freqs.semantic[sn[j]], sn[j], Provenance::kSemantic});
          ++j;
        } else {
          const EntityId m = tn[i];
          first.push_back({std::min(freqs.topological[m], freqs.semantic[m]), m,
                           Provenance::kBoth});
          ++i;
          ++j;
        }
      }
    }
    std::sort(first.begin(), first.end());
    std::sort(rest.begin(), rest.end());
    for (const auto* group : {&first, &rest}) {
      for (const auto& c : *group) {
        if (table.valid_count(e) == k) break;
        table.push(e, c.id, c.flag);
      }
    }
  }
  return table;
}

std::vector<std::size_t> neighbor_histogram(const NeighborTable& table) {
  std::vector<std::size_t> hist(table.k() + 1, 0);
  for (EntityId e = 0; e < table.entity_count(); ++e) {
    ++hist[table.valid_count(e)];
  }
  return hist;
}

void write_neighbor_cache(const std::filesystem::path& path,
                          const NeighborTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write neighbor cache: " + path.string());
  out << "K=" << table.k() << " mode=" << to_string(table.mode()) << "\n";
  for (EntityId e = 0; e < table.entity_count(); ++e) {
    out << e << '\t';
    const auto ids = table.ids(e);
    const auto flags = table.flags(e);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out << ',';
      out << ids[i];
    }
    out << '\t';
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (i > 0) out << ',';
      out << to_string(flags[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing neighbor cache: " + path.string());
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

NeighborTable read_neighbor_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing neighbor cache: " + path.string());
  std::string header;
  std::getline(in, header);
  std::size_t k = 0;
  char mode_buf[32] = {0};
  if (std::sscanf(header.c_str(), "K=%zu mode=%31s", &k, mode_buf) != 2) {
    throw DataError("bad neighbor cache header: " + path.string());
  }
  const NeighborMode mode = parse_neighbor_mode(mode_buf);
  struct Row {
    std::vector<EntityId> ids;
    std::vector<Provenance> flags;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw DataError("bad neighbor cache line in " + path.string());
    }
    const auto id = std::stoul(line.substr(0, t1));
    if (id != rows.size()) {
      throw DataError("neighbor cache rows out of order: " + path.string());
    }
    Row row;
    for (const auto& s : split_commas(line.substr(t1 + 1, t2 - t1 - 1))) {
      row.ids.push_back(static_cast<EntityId>(std::stoul(s)));
    }
    for (const auto& s : split_commas(line.substr(t2 + 1))) {
      row.flags.push_back(parse_provenance(s));
    }
    if (row.ids.size() != row.flags.size() || row.ids.size() > k) {
      throw DataError("bad neighbor cache row " + std::to_string(id));
    }
    rows.push_back(std::move(row));
  }
  NeighborTable table(rows.size(), k, mode);
  for (EntityId e = 0; e < rows.size(); ++e) {
    for (std::size_t i = 0; i < rows[e].ids.size(); ++i) {
      table.push(e, rows[e].ids[i], rows[e].flags[i]);
    }
  }
  return table;
}

}  // namespace nkge
