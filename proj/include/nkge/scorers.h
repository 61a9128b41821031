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

#ifndef NKGE_SCORERS_H_
#define NKGE_SCORERS_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nkge/kernels.h"
#include "nkge/params.h"

namespace nkge {

enum class Dissimilarity { kL1, kL2Squared };

std::string_view to_string(Dissimilarity d);
Dissimilarity parse_dissimilarity(std::string_view s);

// ||h + r - t|| under the chosen dissimilarity; lower is more plausible.
template <typename T>
T transe_score(std::span<const T> head, std::span<const T> relation,
               std::span<const T> tail, Dissimilarity dissimilarity) {
  const std::size_t d = head.size();
  ops::check_size(relation.size(), d, "transe_score");
  ops::check_size(tail.size(), d, "transe_score");
  T sum{0};
  if (dissimilarity == Dissimilarity::kL1) {
    for (std::size_t i = 0; i < d; ++i) {
      sum += std::abs(head[i] + relation[i] - tail[i]);
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      const T x = head[i] + relation[i] - tail[i];
      sum += x * x;
    }
  }
  ops::check_finite(sum, "transe_score");
  return sum;
}

// Accumulates upstream * d(score)/d(input) into any non-empty span.
template <typename T>
void transe_score_backward(std::span<const T> head,
                           std::span<const T> relation,
                           std::span<const T> tail,
                           Dissimilarity dissimilarity, T upstream,
                           std::span<T> d_head, std::span<T> d_relation,
                           std::span<T> d_tail) {
  if (upstream == T{0}) return;
  const std::size_t d = head.size();
  for (std::size_t i = 0; i < d; ++i) {
    const T x = head[i] + relation[i] - tail[i];
    T g;
    if (dissimilarity == Dissimilarity::kL1) {
      g = x > T{0} ? T{1} : (x < T{0} ? T{-1} : T{0});
    } else {
      g = T{2} * x;
    }
    g *= upstream;
    if (!d_head.empty()) d_head[i] += g;
    if (!d_relation.empty()) d_relation[i] += g;
    if (!d_tail.empty()) d_tail[i] -= g;
  }
}

struct ConvEConfig {
  std::size_t dim = 200;
  std::size_t reshape_height = 10;
  std::size_t reshape_width = 20;
  std::size_t filters = 32;
  std::size_t kernel = 3;
  double input_dropout = 0.2;
  double feature_dropout = 0.2;
  double hidden_dropout = 0.3;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
};

// Per-batch activations needed by the backward pass.
template <typename T>
struct ConvETrace {
  std::size_t batch = 0;
  bool training = false;
  std::vector<T> input;        // B x (2h*w), stacked [h; r]
  std::vector<T> input_hat;    // normalized input
  std::vector<T> input_mask;   // dropout scale per element (empty = none)
  std::vector<T> conv_in;      // after bn0 + dropout
  std::vector<T> conv_hat;     // normalized conv output, B x F x oh x ow
  std::vector<T> conv_act;     // after bn1 (pre-ReLU)
  std::vector<T> feature_mask;
  std::vector<T> features;     // after ReLU + dropout, flattened
  std::vector<T> hidden_hat;   // normalized fc output, B x d
  std::vector<T> hidden_act;   // after bn2 (pre-ReLU)
  std::vector<T> hidden_mask;
  std::vector<T> hidden;       // after ReLU + dropout
  std::vector<T> bn0_inv_std;  // 1 per channel
  std::vector<T> bn1_inv_std;  // F
  std::vector<T> bn2_inv_std;  // d
};

enum class Phase { kTrain, kEval };

// ConvE scorer: 2D convolution over the stacked reshaped (head, relation)
// pair, projected back to d and matched against every tail embedding.
template <typename T>
class ConvE {
 public:
  ConvE() = default;
  ConvE(ParamRegistry<T>& registry, const std::string& prefix,
        const ConvEConfig& config, std::size_t entity_count);

  const ConvEConfig& config() const { return config_; }
  std::size_t feature_height() const {
    return 2 * config_.reshape_height - config_.kernel + 1;
  }
  std::size_t feature_width() const {
    return config_.reshape_width - config_.kernel + 1;
  }
  std::size_t flat_size() const {
    return config_.filters * feature_height() * feature_width();
  }

  // Initializes batch-norm scales to 1 and shifts/biases/running means to 0,
  // running variances to 1; weights are left to the caller.
  void reset_normalization(ParamRegistry<T>& registry) const;

  // scores: B x E logits. In kTrain phase batch statistics are used and the
  // running statistics updated; dropout draws from `rng`.
  void forward(ParamRegistry<T>& registry, std::span<const T> heads,
               std::span<const T> relations, std::span<const T> tails,
               std::size_t batch, Phase phase, std::mt19937_64* rng,
               ConvETrace<T>& trace, std::span<T> scores) const;

  // Accumulates parameter gradients plus gradients for heads and relations
  // (B x d each) and the tail table (E x d).
  void backward(ParamRegistry<T>& registry, std::span<const T> tails,
                const ConvETrace<T>& trace, std::span<const T> d_scores,
                std::span<T> d_heads, std::span<T> d_relations,
                std::span<T> d_tails) const;

  // Single query in eval phase; no trace retained and no state touched.
  void score_all(const ParamRegistry<T>& registry, std::span<const T> head,
                 std::span<const T> relation, std::span<const T> tails,
                 std::span<T> scores) const;

  struct Ids {
    ParamId conv_weight, conv_bias, fc_weight, fc_bias, entity_bias;
    ParamId bn0_scale, bn0_shift, bn0_mean, bn0_var;
    ParamId bn1_scale, bn1_shift, bn1_mean, bn1_var;
    ParamId bn2_scale, bn2_shift, bn2_mean, bn2_var;
  };
  const Ids& ids() const { return ids_; }

 private:
  ConvEConfig config_;
  std::size_t entity_count_ = 0;
  Ids ids_{};

  void run_forward(const ParamRegistry<T>& registry, std::span<const T> heads,
                   std::span<const T> relations, std::span<const T> tails,
                   std::size_t batch, Phase phase, std::mt19937_64* rng,
                   ConvETrace<T>& trace, std::span<T> scores,
                   ParamRegistry<T>* stats_out) const;
};

template <typename T>
void conve_score_all(const ConvE<T>& model, const ParamRegistry<T>& registry,
                     std::span<const T> head, std::span<const T> relation,
                     std::span<const T> tails, std::span<T> scores) {
  model.score_all(registry, head, relation, tails, scores);
}

}  // namespace nkge

#endif  // NKGE_SCORERS_H_
