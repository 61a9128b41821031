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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "nkge/errors.h"
#include "test_util.h"

namespace nkge {
namespace {

EntityId id_of(const KnowledgeGraph& kg, const std::string& name) {
  return *kg.entities.find(name);
}

std::vector<EntityId> ids_of(const KnowledgeGraph& kg,
                             std::initializer_list<const char*> names) {
  std::vector<EntityId> out;
  for (const char* n : names) out.push_back(id_of(kg, n));
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Topological, TriangleExample) {
  const KnowledgeGraph kg = testing::triangle_graph();
  const NeighborLists tn = extract_topological(kg);
  EXPECT_EQ(tn[id_of(kg, "a")], ids_of(kg, {"b", "c"}));
  EXPECT_EQ(tn[id_of(kg, "b")], ids_of(kg, {"a"}));
  EXPECT_EQ(tn[id_of(kg, "c")], ids_of(kg, {"a"}));
}

TEST(Topological, IsolatedEntityAndNoLeakage) {
  const std::vector<NamedTriple> train{{"a", "r", "b"}};
  const std::vector<NamedTriple> valid{{"a", "r", "c"}};
  const std::vector<NamedTriple> test{{"d", "r", "b"}};
  const KnowledgeGraph kg = make_graph(train, valid, test);
  const NeighborLists tn = extract_topological(kg);
  EXPECT_TRUE(tn[id_of(kg, "c")].empty());
  EXPECT_TRUE(tn[id_of(kg, "d")].empty());
  EXPECT_EQ(tn[id_of(kg, "a")], ids_of(kg, {"b"}));

  const KnowledgeGraph train_only = make_graph(train);
  const NeighborLists tn_train = extract_topological(train_only);
  for (EntityId e = 0; e < train_only.entity_count(); ++e) {
    EXPECT_EQ(tn[e], tn_train[e]);
  }
}

TEST(Topological, SelfLoopKeepsEntity) {
  const std::vector<NamedTriple> train{{"a", "r", "a"}};
  const NeighborLists tn = extract_topological(make_graph(train));
  EXPECT_EQ(tn[0], std::vector<EntityId>{0});
}

TEST(Semantic, MentionIsSymmetric) {
  const std::vector<std::string> names{"paris", "france"};
  const std::vector<std::string> desc{"", "Its capital is Paris."};
  const NeighborLists sn = extract_semantic(make_corpus(names, desc));
  EXPECT_EQ(sn[0], std::vector<EntityId>{1});
  EXPECT_EQ(sn[1], std::vector<EntityId>{0});
}

TEST(Semantic, MultiTokenNameMatchesContiguousRun) {
  const std::vector<std::string> names{"mac os", "apple", "os mac"};
  const std::vector<std::string> desc{"", "apple makes mac os today", ""};
  const NeighborLists sn = extract_semantic(make_corpus(names, desc));
  EXPECT_EQ(sn[1], std::vector<EntityId>{0});
  EXPECT_EQ(sn[0], std::vector<EntityId>{1});
  EXPECT_TRUE(sn[2].empty());
}

TEST(Semantic, EmptyDescriptionsGiveEmptySets) {
  const std::vector<std::string> names{"alpha", "beta", "gamma"};
  const std::vector<std::string> desc{"", "", ""};
  for (const auto& s : extract_semantic(make_corpus(names, desc))) {
    EXPECT_TRUE(s.empty());
  }
}

TEST(Semantic, SelfMentionAndShortNamesExcluded) {
  const std::vector<std::string> names{"alpha", "x", ""};
  const std::vector<std::string> desc{"alpha is x", "alpha", "alpha"};
  SemanticReport report;
  const NeighborLists sn = extract_semantic(make_corpus(names, desc), &report);
  EXPECT_EQ(sn[0], (std::vector<EntityId>{1, 2}));
  EXPECT_EQ(report.excluded_short_names, 1u);
  EXPECT_EQ(report.empty_names, 1u);
}

TEST(Frequency, TriangleCounts) {
  const KnowledgeGraph kg = testing::triangle_graph();
  NeighborSets sets;
  sets.topological = extract_topological(kg);
  sets.semantic.assign(kg.entity_count(), {});
  const NeighborFrequencies f = neighbor_frequency(sets);
  EXPECT_EQ(f.topological[id_of(kg, "a")], 2u);
  EXPECT_EQ(f.topological[id_of(kg, "b")], 1u);
  EXPECT_EQ(f.topological[id_of(kg, "c")], 1u);
  for (auto v : f.semantic) EXPECT_EQ(v, 0u);
}

TEST(Select, HandExample) {
  // e=0, a=1, b=2, c=3, d=4
  NeighborSets sets;
  sets.topological = {{1, 2, 3}, {}, {}, {}, {}};
  sets.semantic = {{2, 3, 4}, {}, {}, {}, {}};
  NeighborFrequencies f;
  f.topological = {0, 5, 1, 1, 0};
  f.semantic = {0, 0, 1, 1, 2};
  const NeighborTable t = select_neighbors(sets, f, 3, NeighborMode::kBoth);
  const std::vector<EntityId> got(t.ids(0).begin(), t.ids(0).end());
  EXPECT_EQ(got, (std::vector<EntityId>{2, 3, 4}));
  EXPECT_EQ(t.flags(0)[0], Provenance::kBoth);
  EXPECT_EQ(t.flags(0)[1], Provenance::kBoth);
  EXPECT_EQ(t.flags(0)[2], Provenance::kSemantic);
}

TEST(Select, LargeKTakesAllCandidates) {
  NeighborSets sets;
  sets.topological = {{1, 2}, {0}, {0}};
  sets.semantic = {{2}, {}, {0}};
  const NeighborTable t = select_neighbors(sets, neighbor_frequency(sets), 20,
                                           NeighborMode::kBoth);
  EXPECT_EQ(t.valid_count(0), 2u);
  EXPECT_EQ(t.ids(0)[0], 2u);
  EXPECT_EQ(t.ids(0)[1], 1u);
}

TEST(Select, ZeroKRejected) {
  NeighborSets sets;
  sets.topological = {{}};
  sets.semantic = {{}};
  EXPECT_THROW(select_neighbors(sets, neighbor_frequency(sets), 0,
                                NeighborMode::kBoth),
               ConfigError);
}

// Generates random neighbor sets over n entities.
NeighborSets random_sets(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<EntityId> pick(0, n - 1);
  std::uniform_int_distribution<int> size(0, 8);
  NeighborSets sets;
  sets.topological.resize(n);
  sets.semantic.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    for (auto* list : {&sets.topological[e], &sets.semantic[e]}) {
      std::set<EntityId> s;
      const int m = size(rng);
      for (int i = 0; i < m; ++i) {
        const EntityId x = pick(rng);
        if (x != e) s.insert(x);
      }
      list->assign(s.begin(), s.end());
    }
  }
  return sets;
}

// Brute-force reference for the selection rule.
std::vector<EntityId> reference_selection(const NeighborSets& sets,
                                          const NeighborFrequencies& f,
                                          EntityId e, std::size_t k,
                                          NeighborMode mode) {
  const std::set<EntityId> tn(sets.topological[e].begin(),
                              sets.topological[e].end());
  const std::set<EntityId> sn(sets.semantic[e].begin(),
                              sets.semantic[e].end());
  std::vector<std::tuple<int, std::uint32_t, EntityId>> keyed;
  if (mode == NeighborMode::kTopological) {
    for (EntityId m : tn) keyed.emplace_back(0, f.topological[m], m);
  } else if (mode == NeighborMode::kSemantic) {
    for (EntityId m : sn) keyed.emplace_back(0, f.semantic[m], m);
  } else {
    std::set<EntityId> all(tn);
    all.insert(sn.begin(), sn.end());
    for (EntityId m : all) {
      const bool in_t = tn.count(m) == 1;
      const bool in_s = sn.count(m) == 1;
      if (in_t && in_s) {
        keyed.emplace_back(0, std::min(f.topological[m], f.semantic[m]), m);
      } else {
        keyed.emplace_back(1, in_t ? f.topological[m] : f.semantic[m], m);
      }
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < keyed.size() && i < k; ++i) {
    out.push_back(std::get<2>(keyed[i]));
  }
  return out;
}

TEST(SelectProperty, MatchesReferenceAndInvariants) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + trial % 20;
    const NeighborSets sets = random_sets(n, rng);
    const NeighborFrequencies f = neighbor_frequency(sets);
    for (const std::size_t k : {1u, 3u, 20u}) {
      for (const NeighborMode mode :
           {NeighborMode::kBoth, NeighborMode::kTopological,
            NeighborMode::kSemantic}) {
        const NeighborTable t = select_neighbors(sets, f, k, mode);
        const NeighborTable again = select_neighbors(sets, f, k, mode);
        ASSERT_EQ(t, again);
        for (EntityId e = 0; e < n; ++e) {
          const auto ids = t.ids(e);
          const auto flags = t.flags(e);
          ASSERT_LE(ids.size(), k);
          const std::vector<EntityId> got(ids.begin(), ids.end());
          ASSERT_EQ(got, reference_selection(sets, f, e, k, mode));
          std::set<EntityId> distinct(ids.begin(), ids.end());
          ASSERT_EQ(distinct.size(), ids.size());
          bool seen_other = false;
          for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto& tn = sets.topological[e];
            const auto& sn = sets.semantic[e];
            const bool in_t = std::binary_search(tn.begin(), tn.end(), ids[i]);
            const bool in_s = std::binary_search(sn.begin(), sn.end(), ids[i]);
            if (mode == NeighborMode::kTopological) {
              ASSERT_TRUE(in_t);
            }
            if (mode == NeighborMode::kSemantic) {
              ASSERT_TRUE(in_s);
            }
            if (mode == NeighborMode::kBoth) {
              ASSERT_TRUE(in_t || in_s);
              if (flags[i] == Provenance::kBoth) {
                ASSERT_TRUE(in_t && in_s);
                ASSERT_FALSE(seen_other);
              } else {
                seen_other = true;
              }
            }
          }
        }
      }
    }
  }
}

TEST(FrequencyProperty, DoubleCountingIdentity) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const NeighborSets sets = random_sets(30, rng);
    const NeighborFrequencies f = neighbor_frequency(sets);
    std::size_t sum_sizes_t = 0, sum_sizes_s = 0;
    for (const auto& l : sets.topological) sum_sizes_t += l.size();
    for (const auto& l : sets.semantic) sum_sizes_s += l.size();
    EXPECT_EQ(std::accumulate(f.topological.begin(), f.topological.end(),
                              std::size_t{0}),
              sum_sizes_t);
    EXPECT_EQ(
        std::accumulate(f.semantic.begin(), f.semantic.end(), std::size_t{0}),
        sum_sizes_s);
  }
}

TEST(SelectProperty, BothFillsAtLeastAsManyFullRows) {
  std::mt19937_64 rng(99);
  const NeighborSets sets = random_sets(40, rng);
  const NeighborFrequencies f = neighbor_frequency(sets);
  const auto both = neighbor_histogram(
      select_neighbors(sets, f, 4, NeighborMode::kBoth));
  const auto top = neighbor_histogram(
      select_neighbors(sets, f, 4, NeighborMode::kTopological));
  EXPECT_GE(both[4], top[4]);
}

TEST(Histogram, IsolatedEntitiesAllAtZero) {
  NeighborSets sets;
  sets.topological.assign(6, {});
  sets.semantic.assign(6, {});
  const auto h = neighbor_histogram(
      select_neighbors(sets, neighbor_frequency(sets), 5, NeighborMode::kBoth));
  ASSERT_EQ(h.size(), 6u);
  EXPECT_EQ(h[0], 6u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_EQ(h[i], 0u);
}

TEST(Histogram, TriangleCounts) {
  const KnowledgeGraph kg = testing::triangle_graph();
  NeighborSets sets;
  sets.topological = extract_topological(kg);
  sets.semantic = extract_semantic(empty_corpus(kg));
  const auto h = neighbor_histogram(
      select_neighbors(sets, neighbor_frequency(sets), 20,
                       NeighborMode::kBoth));
  ASSERT_EQ(h.size(), 21u);
  EXPECT_EQ(h[0], 0u);
  EXPECT_EQ(h[1], 2u);
  EXPECT_EQ(h[2], 1u);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cache, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  const NeighborSets sets = random_sets(25, rng);
  const NeighborTable t = select_neighbors(sets, neighbor_frequency(sets), 6,
                                           NeighborMode::kBoth);
  const auto dir = testing::temp_dir("cache");
  write_neighbor_cache(dir / "a.tsv", t);
  const NeighborTable back = read_neighbor_cache(dir / "a.tsv");
  EXPECT_EQ(back, t);
  write_neighbor_cache(dir / "b.tsv", back);
  EXPECT_EQ(slurp(dir / "a.tsv"), slurp(dir / "b.tsv"));
  std::filesystem::remove_all(dir);
}

TEST(Cache, MalformedFilesRejected) {
  const auto dir = testing::temp_dir("badcache");
  EXPECT_THROW(read_neighbor_cache(dir / "missing.tsv"), DataError);
  {
    std::ofstream out(dir / "bad.tsv");
    out << "K=2 mode=both\n0\t1,2,3\tboth,both,both\n";
  }
  EXPECT_THROW(read_neighbor_cache(dir / "bad.tsv"), DataError);
  {
    std::ofstream out(dir / "hdr.tsv");
    out << "nonsense\n";
  }
  EXPECT_THROW(read_neighbor_cache(dir / "hdr.tsv"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Toy, DescriptionsProduceSemanticNeighbors) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  const DescriptionCorpus c =
      load_descriptions(testing::toy_dir() / "descriptions.txt", kg);
  NeighborSets sets;
  sets.topological = extract_topological(kg);
  sets.semantic = extract_semantic(c);
  std::size_t with_sn = 0;
  for (const auto& s : sets.semantic) with_sn += !s.empty();
  EXPECT_GT(with_sn, 40u);
  const NeighborTable t = select_neighbors(sets, neighbor_frequency(sets), 10,
                                           NeighborMode::kBoth);
  std::size_t both = 0;
  for (EntityId e = 0; e < t.entity_count(); ++e) {
    for (auto fl : t.flags(e)) both += fl == Provenance::kBoth;
  }
  EXPECT_GT(both, 0u);
}

}  // namespace
}  // namespace nkge
