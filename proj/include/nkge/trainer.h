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

#ifndef NKGE_TRAINER_H_
#define NKGE_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nkge/evaluator.h"
#include "nkge/kg_store.h"
#include "nkge/model.h"
#include "nkge/neighbors.h"
#include "nkge/optimizer.h"

namespace nkge {

struct TrainConfig {
  Variant variant = Variant::kTransE;
  EncoderKind encoder = EncoderKind::kDmn;
  NeighborMode neighbor_mode = NeighborMode::kBoth;
  std::size_t neighbors = 20;  // K
  std::size_t dim = 100;
  std::size_t layers = 6;
  bool tie_layers = false;
  Dissimilarity dissimilarity = Dissimilarity::kL1;
  double margin = 2.0;
  double l2 = 1e-5;
  double learning_rate = 0.001;
  OptimizerRule optimizer = OptimizerRule::kSgd;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 1000;
  std::size_t eval_every = 20;
  std::size_t patience = 10;
  std::size_t negatives = 1;
  double label_smoothing = 0.1;
  ConvEConfig conve;
  double init_range = 0.01;
  bool warm_start = true;
  std::size_t pretrain_epochs = 1000;
  double pretrain_learning_rate = 0.001;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  // Per-variant defaults.
  static TrainConfig transe_defaults();
  static TrainConfig conve_defaults();

  ModelConfig model_config(const KnowledgeGraph& kg) const;
};

struct NegativeSample {
  Triple triple;
  bool head_replaced = false;
  bool accepted_known = false;  // rejection budget exhausted
};

inline constexpr int kMaxCorruptionAttempts = 100;

NegativeSample sample_negative(const Triple& triple,
                               const CorruptionStats& stats,
                               const KnowledgeGraph& kg, std::mt19937_64& rng);

// max(0, margin + pos - neg).
double margin_loss(double positive, double negative, double margin);

// Smoothed label y(1 - s) + s / n.
double smooth_label(double y, double smoothing, std::size_t n);

// Mean binary cross-entropy of sigmoid(logits) against labels (already
// smoothed). p is clamped to [1e-7, 1 - 1e-7] inside the logarithms. When
// d_logits is non-empty it receives (sigmoid(s) - y) / n.
double bce_loss(std::span<const double> logits, std::span<const double> labels,
                std::span<double> d_logits = {});

// Hinge loss of a TransE-variant batch, summed over (positive, negative)
// pairs; gradients accumulate into the model registry when `backward`.
template <typename T>
double transe_batch(NkgeModel<T>& model, std::span<const Triple> positives,
                    std::span<const Triple> negatives, double margin,
                    bool backward);

// One 1-N query of the ConvE variant: entity `entity` under relation row
// `relation` (reciprocal ids for head prediction), labels over all entities.
struct OneToNQuery {
  EntityId entity = 0;
  RelationId relation = 0;
  std::vector<EntityId> answers;
};

// Mean BCE over the batch of 1-N queries with label smoothing.
template <typename T>
double conve_batch(NkgeModel<T>& model, std::span<const OneToNQuery> queries,
                   double label_smoothing, Phase phase, std::mt19937_64* rng,
                   bool backward);

// Train-split 1-N queries: (h, r) -> tails and (t, r^-1) -> heads.
std::vector<OneToNQuery> one_to_n_queries(const KnowledgeGraph& kg);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0;
  double learning_rate = 0;
  std::optional<Metrics> valid;
  double wall_time_s = 0;
};

nlohmann::json to_json(const EpochRecord& record);

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_valid_mrr = -1;
  bool early_stopped = false;
};

struct FitOptions {
  // Evaluation split for early stopping; defaults to kg.valid.
  std::optional<std::span<const Triple>> validation;
  std::function<void(const EpochRecord&)> on_epoch;
  // Disables early stopping and best-checkpoint restore.
  bool keep_last = false;
};

// Trains the model in place; the best validation parameters are restored at
// the end unless keep_last.
TrainResult fit(NkgeModel<float>& model, const KnowledgeGraph& kg,
                const TrainConfig& config, const FitOptions& options = {});

// Plain TransE (no neighbor encoder) trained for the pretraining budget.
TrainResult pretrain_transe(NkgeModel<float>& model, const KnowledgeGraph& kg,
                            const TrainConfig& config,
                            const FitOptions& options = {});

// Config for the plain-TransE pretraining run derived from `config`.
TrainConfig pretrain_config(const TrainConfig& config);

}  // namespace nkge

#endif  // NKGE_TRAINER_H_
