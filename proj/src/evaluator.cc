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

#include <algorithm>
#include <cmath>
#include <map>

#include "nkge/errors.h"
#include "nkge/parallel.h"

namespace nkge {

void CallbackRanker::score_tails(EntityId h, RelationId r,
                                 std::span<double> out) const {
  for (std::size_t c = 0; c < entities_; ++c) {
    out[c] = score_(h, r, static_cast<EntityId>(c));
  }
}

void CallbackRanker::score_heads(RelationId r, EntityId t,
                                 std::span<double> out) const {
  for (std::size_t c = 0; c < entities_; ++c) {
    out[c] = score_(static_cast<EntityId>(c), r, t);
  }
}

void RankingModel::score_block(bool tail_side,
                               std::span<const EntityId> anchors, RelationId r,
                               std::span<double> out) const {
  const std::size_t n = entity_count();
  for (std::size_t q = 0; q < anchors.size(); ++q) {
    auto row = out.subspan(q * n, n);
    if (tail_side) {
      score_tails(anchors[q], r, row);
    } else {
      score_heads(r, anchors[q], row);
    }
  }
}

template <typename T>
bool ModelRanker<T>::higher_is_better() const {
  return model_.config().variant == Variant::kConvE;
}

template <typename T>
void ModelRanker<T>::prepare(RelationId r, std::size_t threads) {
  if (model_.config().variant != Variant::kTransE) return;
  if (model_.config().encoder == EncoderKind::kNone) return;
  if (prepared_ == r) return;
  const std::size_t n = entity_count();
  const std::size_t d = model_.config().dim;
  joint_.resize(n * d);
  const std::size_t chunks = std::max<std::size_t>(1, threads) * 8;
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    JointTrace<T> trace;
    const std::size_t begin = n * chunk / chunks;
    const std::size_t end = n * (chunk + 1) / chunks;
    for (std::size_t e = begin; e < end; ++e) {
      model_.joint(static_cast<EntityId>(e), r, trace);
      std::copy(trace.joint.begin(), trace.joint.end(),
                joint_.begin() + e * d);
    }
  });
  prepared_ = r;
}

template <typename T>
std::span<const T> ModelRanker<T>::table() const {
  if (model_.config().encoder == EncoderKind::kNone) {
    return model_.structure_table().values();
  }
  return joint_;
}

template <typename T>
std::span<const T> ModelRanker<T>::joint_row(EntityId e) const {
  const std::size_t d = model_.config().dim;
  return table().subspan(e * d, d);
}

namespace {

// Tail side: ||q - c||, q = h + r. Head side: ||c - q||, q = t - r; the two
// agree up to sign inside the norm.
template <typename T>
void translate_scores(std::span<const T> query, std::span<const T> table,
                      std::size_t d, Dissimilarity dis,
                      std::span<double> out) {
  const std::size_t n = table.size() / d;
  const T* q = query.data();
  for (std::size_t c = 0; c < n; ++c) {
    const T* v = table.data() + c * d;
    T sum{0};
    if (dis == Dissimilarity::kL1) {
#pragma omp simd reduction(+ : sum)
      for (std::size_t i = 0; i < d; ++i) sum += std::abs(q[i] - v[i]);
    } else {
#pragma omp simd reduction(+ : sum)
      for (std::size_t i = 0; i < d; ++i) sum += (q[i] - v[i]) * (q[i] - v[i]);
    }
    out[c] = double(sum);
  }
}

}  // namespace

template <typename T>
void ModelRanker<T>::score_tails(EntityId h, RelationId r,
                                 std::span<double> out) const {
  const auto& cfg = model_.config();
  const std::size_t d = cfg.dim;
  ops::check_size(out.size(), entity_count(), "score_tails");
  if (cfg.variant == Variant::kConvE) {
    JointTrace<T> trace;
    model_.joint(h, r, trace);
    std::vector<T> scores(entity_count());
    model_.conve().score_all(model_.params(), trace.joint, model_.relation(r),
                             model_.structure_table().values(), scores);
    std::copy(scores.begin(), scores.end(), out.begin());
    return;
  }
  if (cfg.encoder != EncoderKind::kNone && prepared_ != r) {
    throw Error(ExitCode::kUsage, "score_tails before prepare");
  }
  std::vector<T> query(d);
  const auto hj = joint_row(h);
  const auto rel = model_.relation(r);
  for (std::size_t i = 0; i < d; ++i) query[i] = hj[i] + rel[i];
  translate_scores<T>(query, table(), d, cfg.dissimilarity, out);
}

template <typename T>
void ModelRanker<T>::score_heads(RelationId r, EntityId t,
                                 std::span<double> out) const {
  const auto& cfg = model_.config();
  const std::size_t d = cfg.dim;
  ops::check_size(out.size(), entity_count(), "score_heads");
  if (cfg.variant == Variant::kConvE) {
    const RelationId inv = model_.reciprocal(r);
    JointTrace<T> trace;
    model_.joint(t, inv, trace);
    std::vector<T> scores(entity_count());
    model_.conve().score_all(model_.params(), trace.joint,
                             model_.relation(inv),
                             model_.structure_table().values(), scores);
    std::copy(scores.begin(), scores.end(), out.begin());
    return;
  }
  if (cfg.encoder != EncoderKind::kNone && prepared_ != r) {
    throw Error(ExitCode::kUsage, "score_heads before prepare");
  }
  std::vector<T> query(d);
  const auto tj = joint_row(t);
  const auto rel = model_.relation(r);
  for (std::size_t i = 0; i < d; ++i) query[i] = tj[i] - rel[i];
  translate_scores<T>(query, table(), d, cfg.dissimilarity, out);
}

template <typename T>
void ModelRanker<T>::score_block(bool tail_side,
                                 std::span<const EntityId> anchors,
                                 RelationId r, std::span<double> out) const {
  const auto& cfg = model_.config();
  if (cfg.variant == Variant::kConvE) {
    RankingModel::score_block(tail_side, anchors, r, out);
    return;
  }
  if (cfg.encoder != EncoderKind::kNone && prepared_ != r) {
    throw Error(ExitCode::kUsage, "score_block before prepare");
  }
  const std::size_t d = cfg.dim;
  const std::size_t n = entity_count();
  const std::size_t b = anchors.size();
  std::vector<T> queries(b * d);
  const auto rel = model_.relation(r);
  for (std::size_t q = 0; q < b; ++q) {
    const auto a = joint_row(anchors[q]);
    for (std::size_t i = 0; i < d; ++i) {
      queries[q * d + i] = tail_side ? a[i] + rel[i] : a[i] - rel[i];
    }
  }
  // Tiles keep a slice of the candidate table in cache across the queries.
  constexpr std::size_t kTile = 256;
  const auto all = table();
  std::vector<double> tile(kTile);
  for (std::size_t begin = 0; begin < n; begin += kTile) {
    const std::size_t count = std::min(kTile, n - begin);
    const auto slice = all.subspan(begin * d, count * d);
    for (std::size_t q = 0; q < b; ++q) {
      translate_scores<T>(std::span<const T>(queries).subspan(q * d, d), slice,
                          d, cfg.dissimilarity,
                          std::span<double>(tile).first(count));
      std::copy(tile.begin(), tile.begin() + count,
                out.begin() + q * n + begin);
    }
  }
}

template class ModelRanker<float>;
template class ModelRanker<double>;

std::size_t filtered_rank(std::span<const double> scores, EntityId truth,
                          std::span<const EntityId> filtered,
                          bool higher_is_better) {
  const double target = scores[truth];
  if (!std::isfinite(target)) {
    throw NumericalError("non-finite score for the true entity");
  }
  auto better = [&](double s) {
    return higher_is_better ? s > target : s < target;
  };
  std::size_t count = 0;
  for (double s : scores) count += better(s) ? 1 : 0;
  for (EntityId c : filtered) {
    if (c != truth && better(scores[c])) --count;
  }
  return count + 1;
}

Metrics summarize(std::span<const std::size_t> ranks) {
  Metrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (std::size_t r : ranks) {
    m.mr += double(r);
    m.mrr += 1.0 / double(r);
    m.hits1 += r <= 1 ? 1 : 0;
    m.hits3 += r <= 3 ? 1 : 0;
    m.hits10 += r <= 10 ? 1 : 0;
  }
  const double n = double(ranks.size());
  m.mr /= n;
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

EvalResult evaluate(RankingModel& model, const KnowledgeGraph& kg,
                    std::span<const Triple> triples,
                    const EvalOptions& options) {
  const std::size_t n = model.entity_count();
  EvalResult result;
  result.head_ranks.assign(triples.size(), 0);
  result.tail_ranks.assign(triples.size(), 0);
  std::map<RelationId, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    by_relation[triples[i].relation].push_back(i);
  }
  const bool higher = model.higher_is_better();
  constexpr std::size_t kBlock = 32;
  for (const auto& [r, members] : by_relation) {
    model.prepare(r, options.threads);
    const std::size_t blocks = (members.size() + kBlock - 1) / kBlock;
    parallel_for(blocks, options.threads, [&](std::size_t blk) {
      const std::size_t begin = blk * kBlock;
      const std::size_t count = std::min(kBlock, members.size() - begin);
      std::vector<EntityId> anchors(count);
      std::vector<double> scores(count * n);
      std::vector<EntityId> filter;
      for (int side = 0; side < 2; ++side) {
        const bool tail_side = side == 0;
        for (std::size_t k = 0; k < count; ++k) {
          const Triple& q = triples[members[begin + k]];
          anchors[k] = tail_side ? q.head : q.tail;
        }
        model.score_block(tail_side, anchors, r, scores);
        for (std::size_t k = 0; k < count; ++k) {
          const std::size_t i = members[begin + k];
          const Triple& q = triples[i];
          filter.clear();
          if (options.filtered) {
            filter = tail_side ? kg.known.tails(q.head, q.relation)
                               : kg.known.heads(q.relation, q.tail);
          }
          const auto row = std::span<const double>(scores).subspan(k * n, n);
          (tail_side ? result.tail_ranks : result.head_ranks)[i] =
              filtered_rank(row, tail_side ? q.tail : q.head, filter, higher);
        }
      }
    });
  }
  result.head = summarize(result.head_ranks);
  result.tail = summarize(result.tail_ranks);
  std::vector<std::size_t> all(result.head_ranks);
  all.insert(all.end(), result.tail_ranks.begin(), result.tail_ranks.end());
  result.combined = summarize(all);
  return result;
}

nlohmann::json to_json(const Metrics& m) {
  return {{"count", m.count}, {"mr", m.mr},         {"mrr", m.mrr},
          {"hits1", m.hits1}, {"hits3", m.hits3}, {"hits10", m.hits10}};
}

nlohmann::json metrics_json(const EvalResult& result,
                            const std::string& dataset,
                            const std::string& config_hash,
                            const std::string& split, bool filtered,
                            double wall_time_s) {
  return {{"dataset", dataset},
          {"config_hash", config_hash},
          {"split", split},
          {"setting", filtered ? "filtered" : "raw"},
          {"tie_convention", kTieConvention},
          {"head", to_json(result.head)},
          {"tail", to_json(result.tail)},
          {"combined", to_json(result.combined)},
          {"wall_time_s", wall_time_s}};
}

}  // namespace nkge
