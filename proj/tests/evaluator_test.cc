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

#include "nkge/evaluator.h"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "nkge/errors.h"
#include "oracle.h"
#include "test_util.h"

namespace nkge {
namespace {

TEST(FilteredRank, StrictlyBestIsOne) {
  const std::vector<double> s{0.9, 0.1, 0.5};
  EXPECT_EQ(filtered_rank(s, 1, {}, false), 1u);
  EXPECT_EQ(filtered_rank(s, 0, {}, true), 1u);
}

TEST(FilteredRank, AllTiedIsOne) {
  const std::vector<double> s(7, 3.0);
  EXPECT_EQ(filtered_rank(s, 4, {}, false), 1u);
  EXPECT_EQ(filtered_rank(s, 4, {}, true), 1u);
}

TEST(FilteredRank, FilteredCompetitorIsRemoved) {
  // Lower is better. Entity 2 beats the truth but is a known answer.
  const std::vector<double> s{0.7, 0.4, 0.1, 0.3, 0.9};
  const std::vector<EntityId> known{1, 2};
  EXPECT_EQ(filtered_rank(s, 1, {}, false), 3u);
  EXPECT_EQ(filtered_rank(s, 1, known, false), 2u);
  std::vector<double> kept{0.7, 0.3, 0.9};
  std::sort(kept.begin(), kept.end());
  const auto pos = std::lower_bound(kept.begin(), kept.end(), 0.4) -
                   kept.begin() + 1;
  EXPECT_EQ(filtered_rank(s, 1, known, false), std::size_t(pos));
}

TEST(FilteredRank, NonFiniteTargetIsNumericalError) {
  const std::vector<double> s{0.1, std::nan(""), 0.2};
  EXPECT_THROW(filtered_rank(s, 1, {}, false), NumericalError);
}

TEST(Summarize, Arithmetic) {
  const std::vector<std::size_t> ranks{4, 4};
  const Metrics m = summarize(ranks);
  EXPECT_EQ(m.count, 2u);
  EXPECT_DOUBLE_EQ(m.mr, 4.0);
  EXPECT_DOUBLE_EQ(m.mrr, 0.25);
  EXPECT_DOUBLE_EQ(m.hits1, 0.0);
  EXPECT_DOUBLE_EQ(m.hits3, 0.0);
  EXPECT_DOUBLE_EQ(m.hits10, 1.0);
  const std::vector<std::size_t> mixed{1, 2, 5, 20};
  const Metrics k = summarize(mixed);
  EXPECT_DOUBLE_EQ(k.mr, 7.0);
  EXPECT_DOUBLE_EQ(k.mrr, (1 + 0.5 + 0.2 + 0.05) / 4);
  EXPECT_DOUBLE_EQ(k.hits1, 0.25);
  EXPECT_DOUBLE_EQ(k.hits3, 0.5);
  EXPECT_DOUBLE_EQ(k.hits10, 0.75);
}

TEST(Evaluate, SingleTripleRankFourBothDirections) {
  const std::vector<NamedTriple> train{{"a", "r", "b"}};
  const KnowledgeGraph kg = make_graph(train);
  // Five extra entities through a second relation.
  std::vector<NamedTriple> more{{"a", "r", "b"}};
  for (const char* n : {"c", "d", "e", "f"}) more.push_back({n, "s", n});
  const KnowledgeGraph big = make_graph(more);
  const EntityId a = 0, b = 1;
  CallbackRanker model(big.entity_count(), false,
                       [&](EntityId h, RelationId, EntityId t) {
                         if (h == a && t == b) return 4.0;
                         // c, d, e score better on both sides.
                         const EntityId other = h == a ? t : h;
                         return other >= 2 && other <= 4 ? 1.0 : 9.0;
                       });
  const std::vector<Triple> split{Triple{a, 0, b}};
  EvalOptions opts;
  opts.threads = 1;
  const EvalResult r = evaluate(model, big, split, opts);
  EXPECT_EQ(r.head_ranks[0], 4u);
  EXPECT_EQ(r.tail_ranks[0], 4u);
  EXPECT_DOUBLE_EQ(r.combined.mr, 4.0);
  EXPECT_DOUBLE_EQ(r.combined.mrr, 0.25);
  EXPECT_DOUBLE_EQ(r.combined.hits3, 0.0);
  EXPECT_DOUBLE_EQ(r.combined.hits10, 1.0);
  (void)kg;
}

TEST(Evaluate, PerfectModel) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  CallbackRanker model(kg.entity_count(), true,
                       [&](EntityId h, RelationId r, EntityId t) {
                         return kg.known.contains(h, r, t) ? 1.0 : 0.0;
                       });
  const EvalResult res = evaluate(model, kg, kg.test);
  EXPECT_DOUBLE_EQ(res.combined.mr, 1.0);
  EXPECT_DOUBLE_EQ(res.combined.mrr, 1.0);
  EXPECT_DOUBLE_EQ(res.combined.hits1, 1.0);
  EXPECT_EQ(res.combined.count, 2 * kg.test.size());
}

double hash_score(EntityId h, RelationId r, EntityId t) {
  std::mt19937_64 rng((std::uint64_t(h) << 40) ^ (std::uint64_t(r) << 20) ^ t);
  return std::uniform_real_distribution<double>(0, 1)(rng);
}

TEST(EvaluateProperty, MatchesOracleAndInvariants) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  for (bool higher : {false, true}) {
    CallbackRanker base(kg.entity_count(), higher, hash_score);
    CallbackRanker affine(kg.entity_count(), higher,
                          [](EntityId h, RelationId r, EntityId t) {
                            return 2 * hash_score(h, r, t) + 7;
                          });
    const auto oracle = testing::brute_force_ranks(kg, kg.test, higher, true,
                                                   hash_score);
    const EvalResult a = evaluate(base, kg, kg.test);
    EXPECT_EQ(a.head_ranks, oracle.head);
    EXPECT_EQ(a.tail_ranks, oracle.tail);
    const EvalResult b = evaluate(affine, kg, kg.test);
    EXPECT_EQ(a.head_ranks, b.head_ranks);
    EXPECT_EQ(a.tail_ranks, b.tail_ranks);

    EvalOptions raw;
    raw.filtered = false;
    const EvalResult r = evaluate(base, kg, kg.test, raw);
    const auto raw_oracle = testing::brute_force_ranks(kg, kg.test, higher,
                                                       false, hash_score);
    EXPECT_EQ(r.head_ranks, raw_oracle.head);
    for (std::size_t i = 0; i < kg.test.size(); ++i) {
      EXPECT_LE(a.head_ranks[i], r.head_ranks[i]);
      EXPECT_LE(a.tail_ranks[i], r.tail_ranks[i]);
    }

    std::vector<Triple> reversed(kg.test.rbegin(), kg.test.rend());
    const EvalResult c = evaluate(base, kg, reversed);
    EXPECT_DOUBLE_EQ(c.combined.mrr, a.combined.mrr);
    EXPECT_DOUBLE_EQ(c.combined.mr, a.combined.mr);
    EXPECT_LE(a.combined.hits1, a.combined.hits3);
    EXPECT_LE(a.combined.hits3, a.combined.hits10);
    EXPECT_NEAR(a.combined.mrr, 0.5 * (a.head.mrr + a.tail.mrr), 1e-12);
  }
}

TEST(EvaluateProperty, ThreadCountDoesNotChangeResults) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  CallbackRanker model(kg.entity_count(), false, hash_score);
  EvalOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const EvalResult a = evaluate(model, kg, kg.train, one);
  const EvalResult b = evaluate(model, kg, kg.train, four);
  EXPECT_EQ(a.head_ranks, b.head_ranks);
  EXPECT_EQ(a.tail_ranks, b.tail_ranks);
}

std::shared_ptr<const NeighborTable> toy_neighbors(const KnowledgeGraph& kg,
                                                   std::size_t k) {
  NeighborSets sets;
  sets.topological = extract_topological(kg);
  sets.semantic = extract_semantic(
      load_descriptions(testing::toy_dir() / "descriptions.txt", kg));
  return std::make_shared<NeighborTable>(select_neighbors(
      sets, neighbor_frequency(sets), k, NeighborMode::kBoth));
}

TEST(ModelRanker, TransEMatchesOracleExactly) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  ModelConfig c;
  c.dim = 8;
  c.layers = 2;
  c.entity_count = kg.entity_count();
  c.relation_count = kg.relation_count();
  NkgeModel<double> model(c, toy_neighbors(kg, 5));
  model.initialize(17);
  testing::randomize(model.params(), 18, 0.5);
  ModelRanker<double> ranker(model);
  EXPECT_FALSE(ranker.higher_is_better());
  const EvalResult r = evaluate(ranker, kg, kg.test);
  const auto oracle = testing::brute_force_ranks(
      kg, kg.test, false, true, [&](EntityId h, RelationId rel, EntityId t) {
        return double(model.transe(h, rel, t));
      });
  EXPECT_EQ(r.head_ranks, oracle.head);
  EXPECT_EQ(r.tail_ranks, oracle.tail);
}

TEST(ModelRanker, ConvEMatchesOracleExactly) {
  const KnowledgeGraph kg = load_dataset(testing::toy_dir());
  ModelConfig c;
  c.variant = Variant::kConvE;
  c.dim = 6;
  c.layers = 1;
  c.entity_count = kg.entity_count();
  c.relation_count = kg.relation_count();
  c.conve.dim = 6;
  c.conve.reshape_height = 2;
  c.conve.reshape_width = 3;
  c.conve.filters = 2;
  c.conve.kernel = 2;
  NkgeModel<double> model(c, toy_neighbors(kg, 5));
  model.initialize(3);
  ModelRanker<double> ranker(model);
  EXPECT_TRUE(ranker.higher_is_better());
  const EvalResult r = evaluate(ranker, kg, kg.test);
  const std::size_t n = kg.entity_count();
  // Head queries go through the reciprocal relation.
  auto score_query = [&](EntityId anchor, RelationId rel, EntityId target) {
    JointTrace<double> trace;
    model.joint(anchor, rel, trace);
    std::vector<double> s(n);
    model.conve().score_all(model.params(), trace.joint, model.relation(rel),
                            model.structure_table().values(), s);
    return s[target];
  };
  const auto tails = testing::brute_force_ranks(
      kg, kg.test, true, true,
      [&](EntityId h, RelationId rel, EntityId t) {
        return score_query(h, rel, t);
      });
  const auto heads = testing::brute_force_ranks(
      kg, kg.test, true, true,
      [&](EntityId h, RelationId rel, EntityId t) {
        return score_query(t, model.reciprocal(rel), h);
      });
  EXPECT_EQ(r.tail_ranks, tails.tail);
  EXPECT_EQ(r.head_ranks, heads.head);
}

TEST(MetricsJson, RecordsConventionAndBlocks) {
  EvalResult r;
  const std::vector<std::size_t> ranks{1, 3};
  r.head = r.tail = r.combined = summarize(ranks);
  const auto j = metrics_json(r, "toy", "abc", "test", true, 1.5);
  EXPECT_EQ(j["dataset"], "toy");
  EXPECT_EQ(j["config_hash"], "abc");
  EXPECT_EQ(j["split"], "test");
  EXPECT_EQ(j["setting"], "filtered");
  EXPECT_EQ(j["tie_convention"], kTieConvention);
  EXPECT_DOUBLE_EQ(j["combined"]["mrr"].get<double>(), (1 + 1.0 / 3) / 2);
  EXPECT_TRUE(j.contains("head"));
  EXPECT_TRUE(j.contains("tail"));
  EXPECT_DOUBLE_EQ(j["wall_time_s"].get<double>(), 1.5);
}

}  // namespace
}  // namespace nkge
