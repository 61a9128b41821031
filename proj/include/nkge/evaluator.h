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

#ifndef NKGE_EVALUATOR_H_
#define NKGE_EVALUATOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nkge/kg_store.h"
#include "nkge/model.h"

namespace nkge {

inline constexpr const char* kTieConvention =
    "optimistic: rank = 1 + #candidates scoring strictly better";

// Scores every candidate entity for one side of a query.
class RankingModel {
 public:
  virtual ~RankingModel() = default;
  virtual bool higher_is_better() const = 0;
  virtual std::size_t entity_count() const = 0;
  // Called once before the queries of relation r; may cache per-relation work.
  virtual void prepare(RelationId /*r*/, std::size_t /*threads*/) {}
  // (h, r, ?) and (?, r, t). Must be safe to call concurrently after prepare.
  virtual void score_tails(EntityId h, RelationId r,
                           std::span<double> out) const = 0;
  virtual void score_heads(RelationId r, EntityId t,
                           std::span<double> out) const = 0;
  // Several queries of one relation at once; out is anchors.size() x E.
  // tail_side: anchors are heads, else tails.
  virtual void score_block(bool tail_side, std::span<const EntityId> anchors,
                           RelationId r, std::span<double> out) const;
};

// Ranking over a fixed score matrix, mostly for tests: tails[(h, r)] and
// heads[(r, t)] are looked up through user callbacks.
class CallbackRanker : public RankingModel {
 public:
  using Fn = std::function<double(EntityId h, RelationId r, EntityId t)>;
  CallbackRanker(std::size_t entity_count, bool higher_is_better, Fn score)
      : entities_(entity_count), higher_(higher_is_better),
        score_(std::move(score)) {}
  bool higher_is_better() const override { return higher_; }
  std::size_t entity_count() const override { return entities_; }
  void score_tails(EntityId h, RelationId r,
                   std::span<double> out) const override;
  void score_heads(RelationId r, EntityId t,
                   std::span<double> out) const override;

 private:
  std::size_t entities_;
  bool higher_;
  Fn score_;
};

// Adapts an NkgeModel. The TransE variant caches the joint table of every
// entity under the prepared relation; the ConvE variant answers head queries
// through the reciprocal relation.
template <typename T>
class ModelRanker : public RankingModel {
 public:
  explicit ModelRanker(const NkgeModel<T>& model) : model_(model) {}
  bool higher_is_better() const override;
  std::size_t entity_count() const override {
    return model_.config().entity_count;
  }
  void prepare(RelationId r, std::size_t threads) override;
  void score_tails(EntityId h, RelationId r,
                   std::span<double> out) const override;
  void score_heads(RelationId r, EntityId t,
                   std::span<double> out) const override;
  void score_block(bool tail_side, std::span<const EntityId> anchors,
                   RelationId r, std::span<double> out) const override;

 private:
  const NkgeModel<T>& model_;
  RelationId prepared_ = ~RelationId{0};
  std::vector<T> joint_;  // E x d under prepared_
  std::span<const T> table() const;
  std::span<const T> joint_row(EntityId e) const;
};

// rank = 1 + #{c != truth, c not in filtered : c scores strictly better}.
std::size_t filtered_rank(std::span<const double> scores, EntityId truth,
                          std::span<const EntityId> filtered,
                          bool higher_is_better);

struct Metrics {
  std::size_t count = 0;
  double mr = 0, mrr = 0, hits1 = 0, hits3 = 0, hits10 = 0;
};

Metrics summarize(std::span<const std::size_t> ranks);

struct EvalOptions {
  bool filtered = true;
  std::size_t threads = 0;
};

struct EvalResult {
  Metrics head, tail, combined;
  std::vector<std::size_t> head_ranks, tail_ranks;  // per input triple
};

EvalResult evaluate(RankingModel& model, const KnowledgeGraph& kg,
                    std::span<const Triple> triples,
                    const EvalOptions& options = {});

nlohmann::json to_json(const Metrics& m);
nlohmann::json metrics_json(const EvalResult& result,
                            const std::string& dataset,
                            const std::string& config_hash,
                            const std::string& split, bool filtered,
                            double wall_time_s);

}  // namespace nkge

#endif  // NKGE_EVALUATOR_H_
