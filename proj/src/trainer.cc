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

#include "nkge/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "nkge/errors.h"
#include "nkge/kernels.h"

namespace nkge {

TrainConfig TrainConfig::transe_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::conve_defaults() {
  TrainConfig c;
  c.variant = Variant::kConvE;
  c.learning_rate = 0.0003;
  c.dim = 200;
  c.layers = 3;
  c.optimizer = OptimizerRule::kAdam;
  c.batch_size = 128;
  return c;
}

ModelConfig TrainConfig::model_config(const KnowledgeGraph& kg) const {
  ModelConfig m;
  m.variant = variant;
  m.encoder = encoder;
  m.dim = dim;
  m.layers = layers;
  m.tie_layers = tie_layers;
  m.dissimilarity = dissimilarity;
  m.entity_count = kg.entity_count();
  m.relation_count = kg.relation_count();
  m.conve = conve;
  m.conve.dim = dim;
  m.init_range = init_range;
  return m;
}

NegativeSample sample_negative(const Triple& triple,
                               const CorruptionStats& stats,
                               const KnowledgeGraph& kg,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<EntityId> pick(
      0, static_cast<EntityId>(kg.entity_count() - 1));
  NegativeSample out;
  out.head_replaced = coin(rng) < stats.replace_head_prob[triple.relation];
  for (int attempt = 0; attempt < kMaxCorruptionAttempts; ++attempt) {
    out.triple = triple;
    (out.head_replaced ? out.triple.head : out.triple.tail) = pick(rng);
    if (!kg.known.contains(out.triple)) return out;
  }
  out.accepted_known = true;
  return out;
}

double margin_loss(double positive, double negative, double margin) {
  return std::max(0.0, margin + positive - negative);
}

double smooth_label(double y, double smoothing, std::size_t n) {
  return y * (1.0 - smoothing) + smoothing / double(n);
}

double bce_loss(std::span<const double> logits, std::span<const double> labels,
                std::span<double> d_logits) {
  ops::check_size(labels.size(), logits.size(), "bce_loss");
  const double n = double(logits.size());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = ops::sigmoid(logits[i]);
    const double pc = std::clamp(p, 1e-7, 1.0 - 1e-7);
    sum += labels[i] * std::log(pc) + (1.0 - labels[i]) * std::log(1.0 - pc);
    if (!d_logits.empty()) d_logits[i] += (p - labels[i]) / n;
  }
  const double loss = -sum / n;
  ops::check_finite(loss, "bce_loss");
  return loss;
}

template <typename T>
double transe_batch(NkgeModel<T>& model, std::span<const Triple> positives,
                    std::span<const Triple> negatives, double margin,
                    bool backward) {
  if (positives.empty()) return 0;
  if (negatives.empty() || negatives.size() % positives.size() != 0) {
    throw ConfigError("negatives must be a multiple of positives");
  }
  const std::size_t per = negatives.size() / positives.size();
  const std::size_t d = model.config().dim;
  const Dissimilarity dis = model.config().dissimilarity;
  auto& registry = model.params();
  JointTrace<T> ph, pt, nx;
  std::vector<T> d_ph(d), d_pt(d), d_nx(d);
  double total = 0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Triple& pos = positives[i];
    model.joint(pos.head, pos.relation, ph);
    model.joint(pos.tail, pos.relation, pt);
    const auto rel = model.relation(pos.relation);
    const T f_pos = transe_score<T>(ph.joint, rel, pt.joint, dis);
    std::fill(d_ph.begin(), d_ph.end(), T{0});
    std::fill(d_pt.begin(), d_pt.end(), T{0});
    auto d_rel = registry.grad(model.relation_id()).row(pos.relation);
    for (std::size_t j = 0; j < per; ++j) {
      const Triple& neg = negatives[i * per + j];
      if (neg.relation != pos.relation) {
        throw ConfigError("negative relation differs from its positive");
      }
      const bool head_side = neg.head != pos.head;
      if (head_side && neg.tail != pos.tail) {
        throw ConfigError("negative must share one side with its positive");
      }
      model.joint(head_side ? neg.head : neg.tail, pos.relation, nx);
      const auto& nh = head_side ? nx.joint : ph.joint;
      const auto& nt = head_side ? pt.joint : nx.joint;
      const T f_neg = transe_score<T>(nh, rel, nt, dis);
      const double loss = margin_loss(double(f_pos), double(f_neg), margin);
      total += loss;
      if (!backward || loss <= 0) continue;
      transe_score_backward<T>(ph.joint, rel, pt.joint, dis, T{1}, d_ph,
                               d_rel, d_pt);
      std::fill(d_nx.begin(), d_nx.end(), T{0});
      if (head_side) {
        transe_score_backward<T>(nh, rel, nt, dis, T{-1}, d_nx, d_rel, d_pt);
      } else {
        transe_score_backward<T>(nh, rel, nt, dis, T{-1}, d_ph, d_rel, d_nx);
      }
      model.joint_backward(nx, d_nx);
    }
    if (backward) {
      model.joint_backward(ph, d_ph);
      model.joint_backward(pt, d_pt);
    }
  }
  ops::check_finite(total, "transe_batch");
  return total;
}

template <typename T>
double conve_batch(NkgeModel<T>& model, std::span<const OneToNQuery> queries,
                   double label_smoothing, Phase phase, std::mt19937_64* rng,
                   bool backward) {
  const std::size_t b = queries.size();
  if (b == 0) return 0;
  const std::size_t d = model.config().dim;
  const std::size_t n = model.config().entity_count;
  auto& registry = model.params();
  std::vector<JointTrace<T>> traces(b);
  std::vector<T> heads(b * d), relations(b * d);
  for (std::size_t q = 0; q < b; ++q) {
    model.joint(queries[q].entity, queries[q].relation, traces[q]);
    std::copy(traces[q].joint.begin(), traces[q].joint.end(),
              heads.begin() + q * d);
    const auto rel = model.relation(queries[q].relation);
    std::copy(rel.begin(), rel.end(), relations.begin() + q * d);
  }
  ConvETrace<T> trace;
  std::vector<T> scores(b * n);
  const auto tails = registry.value(model.structure_id()).values();
  model.conve().forward(registry, heads, relations, tails, b, phase, rng,
                        trace, scores);
  std::vector<double> logits(n), labels(n), grad(n);
  std::vector<T> d_scores(backward ? b * n : 0);
  double total = 0;
  for (std::size_t q = 0; q < b; ++q) {
    std::fill(labels.begin(), labels.end(),
              smooth_label(0.0, label_smoothing, n));
    for (EntityId a : queries[q].answers) {
      labels[a] = smooth_label(1.0, label_smoothing, n);
    }
    for (std::size_t c = 0; c < n; ++c) logits[c] = double(scores[q * n + c]);
    std::fill(grad.begin(), grad.end(), 0.0);
    total += bce_loss(logits, labels,
                      backward ? std::span<double>(grad) : std::span<double>());
    if (backward) {
      for (std::size_t c = 0; c < n; ++c) {
        d_scores[q * n + c] = T(grad[c] / double(b));
      }
    }
  }
  if (backward) {
    std::vector<T> d_heads(b * d, T{0}), d_relations(b * d, T{0});
    model.conve().backward(registry, tails, trace, d_scores, d_heads,
                           d_relations,
                           registry.grad(model.structure_id()).values());
    auto& rel_grad = registry.grad(model.relation_id());
    for (std::size_t q = 0; q < b; ++q) {
      model.joint_backward(traces[q],
                           std::span<const T>(d_heads).subspan(q * d, d));
      ops::axpy<T>(T{1}, std::span<const T>(d_relations).subspan(q * d, d),
                   rel_grad.row(queries[q].relation));
    }
  }
  return total / double(b);
}

template double transe_batch<float>(NkgeModel<float>&, std::span<const Triple>,
                                    std::span<const Triple>, double, bool);
template double transe_batch<double>(NkgeModel<double>&,
                                     std::span<const Triple>,
                                     std::span<const Triple>, double, bool);
template double conve_batch<float>(NkgeModel<float>&,
                                   std::span<const OneToNQuery>, double, Phase,
                                   std::mt19937_64*, bool);
template double conve_batch<double>(NkgeModel<double>&,
                                    std::span<const OneToNQuery>, double,
                                    Phase, std::mt19937_64*, bool);

std::vector<OneToNQuery> one_to_n_queries(const KnowledgeGraph& kg) {
  const auto nr = static_cast<RelationId>(kg.relation_count());
  std::map<std::pair<EntityId, RelationId>, std::vector<EntityId>> groups;
  for (const Triple& t : kg.train) {
    groups[{t.head, t.relation}].push_back(t.tail);
    groups[{t.tail, static_cast<RelationId>(t.relation + nr)}].push_back(
        t.head);
  }
  std::vector<OneToNQuery> out;
  out.reserve(groups.size());
  for (auto& [key, answers] : groups) {
    std::sort(answers.begin(), answers.end());
    out.push_back({key.first, key.second, std::move(answers)});
  }
  return out;
}

nlohmann::json to_json(const EpochRecord& record) {
  nlohmann::json j{{"epoch", record.epoch},
                   {"loss", record.loss},
                   {"learning_rate", record.learning_rate}};
  if (record.valid) j["valid"] = to_json(*record.valid);
  j["wall_time_s"] = record.wall_time_s;
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Tensor<float>> snapshot(const ParamRegistry<float>& registry) {
  std::vector<Tensor<float>> out;
  for (const auto& p : registry) out.push_back(p.value);
  return out;
}

void restore(ParamRegistry<float>& registry,
             const std::vector<Tensor<float>>& values) {
  std::size_t i = 0;
  for (auto& p : registry) p.value = values[i++];
}

}  // namespace

TrainResult fit(NkgeModel<float>& model, const KnowledgeGraph& kg,
                const TrainConfig& config, const FitOptions& options) {
  if (config.batch_size == 0 || config.eval_every == 0) {
    throw ConfigError("batch_size and eval_every must be positive");
  }
  if (kg.train.empty()) throw DataError("empty train split");
  const auto start = Clock::now();
  std::mt19937_64 rng(config.seed);
  Optimizer<float> optimizer(
      model.params(),
      OptimizerOptions{.rule = config.optimizer,
                       .learning_rate = config.learning_rate,
                       .l2 = config.l2});
  auto& registry = model.params();
  const bool conve = config.variant == Variant::kConvE;
  const std::span<const Triple> validation =
      options.validation ? *options.validation
                         : std::span<const Triple>(kg.valid);

  const CorruptionStats stats = corruption_stats(kg);
  std::vector<OneToNQuery> queries;
  if (conve) queries = one_to_n_queries(kg);
  std::vector<std::size_t> order(conve ? queries.size() : kg.train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<Tensor<float>> best;
  std::size_t stale = 0;
  std::vector<Triple> positives, negatives;
  std::vector<OneToNQuery> batch_queries;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::size_t terms = 0;
    for (std::size_t begin = 0, batch = 0; begin < order.size();
         begin += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      registry.zero_grads();
      double loss;
      try {
        if (conve) {
          batch_queries.clear();
          for (std::size_t k = begin; k < end; ++k) {
            batch_queries.push_back(queries[order[k]]);
          }
          loss = conve_batch<float>(model, batch_queries,
                                    config.label_smoothing, Phase::kTrain,
                                    &rng, true) *
                 double(end - begin);
          terms += end - begin;
        } else {
          positives.clear();
          negatives.clear();
          for (std::size_t k = begin; k < end; ++k) {
            const Triple& pos = kg.train[order[k]];
            positives.push_back(pos);
            for (std::size_t j = 0; j < config.negatives; ++j) {
              negatives.push_back(
                  sample_negative(pos, stats, kg, rng).triple);
            }
          }
          loss = transe_batch<float>(model, positives, negatives, config.margin,
                                     true);
          terms += negatives.size();
        }
      } catch (const NumericalError& e) {
        throw NumericalError("at epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch) + ": " + e.what());
      }
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite loss at epoch " +
                             std::to_string(epoch) + " batch " +
                             std::to_string(batch));
      }
      total += loss;
      optimizer.step(registry);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.loss = total / double(std::max<std::size_t>(1, terms)) +
                  config.l2 * registry.squared_norm();
    record.learning_rate = config.learning_rate;
    bool stop = false;
    if (epoch % config.eval_every == 0 || epoch == config.max_epochs) {
      ModelRanker<float> ranker(model);
      const EvalResult ev = evaluate(ranker, kg, validation,
                                     {.filtered = true,
                                      .threads = config.threads});
      record.valid = ev.combined;
      if (ev.combined.mrr > result.best_valid_mrr) {
        result.best_valid_mrr = ev.combined.mrr;
        result.best_epoch = epoch;
        stale = 0;
        if (!options.keep_last) best = snapshot(registry);
      } else if (++stale >= config.patience && !options.keep_last) {
        stop = true;
      }
    }
    record.wall_time_s =
        std::chrono::duration<double>(Clock::now() - start).count();
    result.log.push_back(record);
    result.epochs_run = epoch;
    if (options.on_epoch) options.on_epoch(record);
    if (stop) {
      result.early_stopped = true;
      break;
    }
  }
  if (!best.empty()) restore(registry, best);
  return result;
}

TrainConfig pretrain_config(const TrainConfig& config) {
  TrainConfig c = config;
  c.variant = Variant::kTransE;
  c.encoder = EncoderKind::kNone;
  c.optimizer = OptimizerRule::kSgd;
  c.learning_rate = config.pretrain_learning_rate;
  c.max_epochs = config.pretrain_epochs;
  if (config.variant == Variant::kConvE) {
    const TrainConfig t = TrainConfig::transe_defaults();
    c.batch_size = t.batch_size;
  }
  return c;
}

TrainResult pretrain_transe(NkgeModel<float>& model, const KnowledgeGraph& kg,
                            const TrainConfig& config,
                            const FitOptions& options) {
  if (model.config().variant != Variant::kTransE ||
      model.config().encoder != EncoderKind::kNone) {
    throw ConfigError("pretraining needs a plain TransE model");
  }
  return fit(model, kg, pretrain_config(config), options);
}

}  // namespace nkge
