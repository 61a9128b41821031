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

#include "nkge/kg_store.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "nkge/errors.h"

namespace nkge {

std::uint32_t Vocabulary::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnownIndex::Hash::operator()(const Triple& t) const {
  std::uint64_t h = 1469598103934665603ull;
  for (const std::uint64_t v : {std::uint64_t(t.head), std::uint64_t(t.relation),
                                std::uint64_t(t.tail)}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

KnownIndex::KnownIndex(std::vector<Triple> triples)
    : by_head_(std::move(triples)) {
  std::sort(by_head_.begin(), by_head_.end());
  by_head_.erase(std::unique(by_head_.begin(), by_head_.end()),
                 by_head_.end());
  by_tail_ = by_head_;
  std::sort(by_tail_.begin(), by_tail_.end(),
            [](const Triple& a, const Triple& b) {
              return std::tie(a.relation, a.tail, a.head) <
                     std::tie(b.relation, b.tail, b.head);
            });
  members_.reserve(by_head_.size() * 2);
  members_.insert(by_head_.begin(), by_head_.end());
}

bool KnownIndex::contains(const Triple& t) const {
  return members_.count(t) > 0;
}

std::vector<EntityId> KnownIndex::tails(EntityId h, RelationId r) const {
  const auto lo = std::lower_bound(by_head_.begin(), by_head_.end(),
                                   Triple{h, r, 0});
  std::vector<EntityId> out;
  for (auto it = lo; it != by_head_.end() && it->head == h && it->relation == r;
       ++it) {
    out.push_back(it->tail);
  }
  return out;
}

std::vector<EntityId> KnownIndex::heads(RelationId r, EntityId t) const {
  const auto lo = std::lower_bound(
      by_tail_.begin(), by_tail_.end(), Triple{0, r, t},
      [](const Triple& a, const Triple& b) {
        return std::tie(a.relation, a.tail, a.head) <
               std::tie(b.relation, b.tail, b.head);
      });
  std::vector<EntityId> out;
  for (auto it = lo;
       it != by_tail_.end() && it->relation == r && it->tail == t; ++it) {
    out.push_back(it->head);
  }
  return out;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

struct SplitBuilder {
  KnowledgeGraph& kg;
  std::size_t train_entities = 0;
  std::size_t train_relations = 0;
  bool after_train = false;

  Triple add(std::string_view h, std::string_view r, std::string_view t) {
    Triple tr{kg.entities.intern(h), kg.relations.intern(r),
              kg.entities.intern(t)};
    return tr;
  }

  void note_split(std::vector<Triple>& split) {
    if (!after_train) {
      train_entities = kg.entities.size();
      train_relations = kg.relations.size();
      after_train = true;
      return;
    }
    for (const auto& t : split) {
      if (t.head >= train_entities || t.tail >= train_entities ||
          t.relation >= train_relations) {
        ++kg.report.triples_with_unseen_ids;
      }
    }
  }
};

std::vector<NamedTriple> read_triples(const std::filesystem::path& path,
                                      const std::string& label) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("missing " + label + " file: " + path.string());
  }
  std::vector<NamedTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = strip_cr(line);
    if (view.empty()) continue;
    const auto fields = split_tabs(view);
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 tab-separated fields");
    }
    out.push_back({std::string(fields[0]), std::string(fields[1]),
                   std::string(fields[2])});
  }
  return out;
}

KnowledgeGraph build_graph(std::span<const NamedTriple> train,
                           std::span<const NamedTriple> valid,
                           std::span<const NamedTriple> test) {
  KnowledgeGraph kg;
  SplitBuilder builder{kg};
  auto fill = [&](std::span<const NamedTriple> src, std::vector<Triple>& dst) {
    dst.reserve(src.size());
    for (const auto& nt : src) dst.push_back(builder.add(nt.head, nt.relation,
                                                         nt.tail));
    builder.note_split(dst);
  };
  fill(train, kg.train);
  fill(valid, kg.valid);
  fill(test, kg.test);
  kg.report.entities_unseen_in_train =
      kg.entities.size() - builder.train_entities;
  kg.report.relations_unseen_in_train =
      kg.relations.size() - builder.train_relations;

  std::vector<Triple> all;
  all.reserve(kg.train.size() + kg.valid.size() + kg.test.size());
  all.insert(all.end(), kg.train.begin(), kg.train.end());
  all.insert(all.end(), kg.valid.begin(), kg.valid.end());
  all.insert(all.end(), kg.test.begin(), kg.test.end());
  const std::size_t total = all.size();
  kg.known = KnownIndex(std::move(all));
  if (kg.known.size() != total) {
    throw DataError("dataset has " + std::to_string(total - kg.known.size()) +
                    " duplicated triples within or across splits");
  }
  return kg;
}

}  // namespace

KnowledgeGraph make_graph(std::span<const NamedTriple> train,
                          std::span<const NamedTriple> valid,
                          std::span<const NamedTriple> test) {
  return build_graph(train, valid, test);
}

KnowledgeGraph load_dataset(const std::filesystem::path& dir) {
  const auto train = read_triples(dir / "train.txt", "train");
  const auto valid = read_triples(dir / "valid.txt", "valid");
  const auto test = read_triples(dir / "test.txt", "test");
  KnowledgeGraph kg = build_graph(train, valid, test);
  kg.name = dir.filename().string();
  if (kg.name.empty()) kg.name = dir.parent_path().filename().string();
  return kg;
}

KnowledgeGraph subsample_by_degree(const KnowledgeGraph& kg,
                                   std::size_t count) {
  std::vector<std::size_t> degree(kg.entity_count(), 0);
  for (const auto& t : kg.train) {
    ++degree[t.head];
    ++degree[t.tail];
  }
  std::vector<EntityId> order(kg.entity_count());
  for (EntityId e = 0; e < order.size(); ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(), [&](EntityId a, EntityId b) {
    return degree[a] > degree[b];
  });
  order.resize(std::min(count, order.size()));
  std::vector<bool> keep(kg.entity_count(), false);
  for (const auto e : order) keep[e] = true;

  auto project = [&](const std::vector<Triple>& split) {
    std::vector<NamedTriple> out;
    for (const auto& t : split) {
      if (!keep[t.head] || !keep[t.tail]) continue;
      out.push_back({kg.entities.name(t.head), kg.relations.name(t.relation),
                     kg.entities.name(t.tail)});
    }
    return out;
  };
  auto reduced = build_graph(project(kg.train), project(kg.valid),
                             project(kg.test));
  // Kept entities whose triples all leave the set stay as isolated ids.
  std::sort(order.begin(), order.end());
  for (const auto e : order) {
    const std::size_t before = reduced.entities.size();
    reduced.entities.intern(kg.entities.name(e));
    if (reduced.entities.size() > before) {
      ++reduced.report.entities_unseen_in_train;
    }
  }
  reduced.name = kg.name + "-top" + std::to_string(count);
  return reduced;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t DescriptionCorpus::missing_descriptions() const {
  return static_cast<std::size_t>(
      std::count(has_description.begin(), has_description.end(), false));
}

namespace {

std::vector<WordId> intern_tokens(Vocabulary& words, std::string_view text) {
  std::vector<WordId> ids;
  for (const auto& tok : tokenize(text)) ids.push_back(words.intern(tok));
  return ids;
}

std::map<std::string, std::string> read_key_text(
    const std::filesystem::path& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw DataError("missing " + label + " file: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = strip_cr(line);
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos) continue;
    out.emplace(std::string(view.substr(0, tab)),
                std::string(view.substr(tab + 1)));
  }
  return out;
}

}  // namespace

DescriptionCorpus load_descriptions(
    const std::filesystem::path& path, const KnowledgeGraph& kg,
    const std::optional<std::filesystem::path>& names_path) {
  const std::size_t n = kg.entity_count();
  std::vector<std::string> names(n);
  std::vector<std::string> texts(n);
  std::vector<bool> present(n, false);
  for (EntityId e = 0; e < n; ++e) names[e] = kg.entities.name(e);

  std::size_t skipped = 0;
  if (names_path) {
    for (const auto& [surface, name] : read_key_text(*names_path, "names")) {
      if (auto id = kg.entities.find(surface)) names[*id] = name;
    }
  }
  for (const auto& [surface, text] : read_key_text(path, "descriptions")) {
    const auto id = kg.entities.find(surface);
    if (!id) {
      ++skipped;
      continue;
    }
    texts[*id] = text;
    present[*id] = true;
  }
  DescriptionCorpus corpus = make_corpus(names, texts);
  corpus.has_description = std::move(present);
  corpus.skipped_unknown = skipped;
  return corpus;
}

DescriptionCorpus make_corpus(std::span<const std::string> names,
                              std::span<const std::string> descriptions) {
  if (names.size() != descriptions.size()) {
    throw DataError("corpus names/descriptions size mismatch");
  }
  DescriptionCorpus corpus;
  corpus.name.resize(names.size());
  corpus.description.resize(names.size());
  corpus.has_description.resize(names.size());
  for (std::size_t e = 0; e < names.size(); ++e) {
    corpus.name[e] = intern_tokens(corpus.words, names[e]);
    corpus.description[e] = intern_tokens(corpus.words, descriptions[e]);
    corpus.has_description[e] = !descriptions[e].empty();
  }
  return corpus;
}

DescriptionCorpus empty_corpus(const KnowledgeGraph& kg) {
  std::vector<std::string> names(kg.entity_count());
  std::vector<std::string> texts(kg.entity_count());
  for (EntityId e = 0; e < names.size(); ++e) names[e] = kg.entities.name(e);
  return make_corpus(names, texts);
}

CorruptionStats corruption_stats(const KnowledgeGraph& kg) {
  const std::size_t nr = kg.relation_count();
  std::vector<std::size_t> count(nr, 0);
  std::vector<std::set<EntityId>> heads(nr), tails(nr);
  for (const auto& t : kg.train) {
    ++count[t.relation];
    heads[t.relation].insert(t.head);
    tails[t.relation].insert(t.tail);
  }
  CorruptionStats stats;
  stats.tails_per_head.assign(nr, 0.0);
  stats.heads_per_tail.assign(nr, 0.0);
  stats.replace_head_prob.assign(nr, 0.5);
  for (std::size_t r = 0; r < nr; ++r) {
    if (count[r] == 0) continue;
    const double tph = double(count[r]) / double(heads[r].size());
    const double hpt = double(count[r]) / double(tails[r].size());
    stats.tails_per_head[r] = tph;
    stats.heads_per_tail[r] = hpt;
    stats.replace_head_prob[r] = tph / (tph + hpt);
  }
  return stats;
}

}  // namespace nkge
