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

#ifndef NKGE_DMN_H_
#define NKGE_DMN_H_

// Deep memory network neighbor encoder.
//
// Each layer attends over the neighbor memory with the current query u:
//   g_i = ReLU(W_att [n_i; u] + b_att)       (valid slots only)
//   p   = softmax(g)                         (normalized over valid slots)
//   o   = sum_i p_i n_i
//   u'  = o + tanh(W_rev u + b_rev)
// The first query is the relation embedding; the memory is shared by every
// layer. With no valid slots, o = 0.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nkge/params.h"

namespace nkge {

template <typename T>
struct Memory {
  std::span<const T> cells;            // slots x dim, row-major
  std::span<const std::uint8_t> mask;  // 1 = valid
  std::size_t dim = 0;

  std::size_t slots() const { return mask.size(); }
  std::span<const T> cell(std::size_t i) const {
    return cells.subspan(i * dim, dim);
  }
};

template <typename T>
struct DmnLayerParams {
  std::span<const T> att_weight;     // 2d
  T att_bias{0};
  std::span<const T> review_weight;  // d x d
  std::span<const T> review_bias;    // d
};

template <typename T>
struct DmnLayerGrads {
  std::span<T> att_weight;
  std::span<T> att_bias;  // one element
  std::span<T> review_weight;
  std::span<T> review_bias;
};

template <typename T>
struct DmnLayerTrace {
  std::vector<T> query;
  std::vector<T> pre_logits;  // before ReLU; 0 on masked slots
  std::vector<T> weights;     // p; exactly 0 on masked slots
  std::vector<T> encoding;    // o
  std::vector<T> review;      // tanh(W_rev u + b_rev)
  std::vector<T> output;
};

template <typename T>
void dmn_layer(const Memory<T>& memory, std::span<const T> query,
               const DmnLayerParams<T>& params, DmnLayerTrace<T>& trace);

// Accumulates parameter, memory (slots x dim) and query gradients.
template <typename T>
void dmn_layer_backward(const Memory<T>& memory,
                        const DmnLayerParams<T>& params,
                        const DmnLayerTrace<T>& trace,
                        std::span<const T> d_output,
                        const DmnLayerGrads<T>& grads, std::span<T> d_memory,
                        std::span<T> d_query);

// Parameter handles for an L-layer encoder. With `tied`, every layer shares
// one set of weights.
template <typename T>
class DmnEncoder {
 public:
  DmnEncoder() = default;
  DmnEncoder(ParamRegistry<T>& registry, const std::string& prefix,
             std::size_t dim, std::size_t layers, bool tied);

  std::size_t layers() const { return layer_ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool tied() const { return tied_; }

  DmnLayerParams<T> layer_params(const ParamRegistry<T>& registry,
                                 std::size_t layer) const;
  DmnLayerGrads<T> layer_grads(ParamRegistry<T>& registry,
                               std::size_t layer) const;

 private:
  struct LayerIds {
    ParamId att_weight, att_bias, review_weight, review_bias;
  };
  std::vector<LayerIds> layer_ids_;
  std::size_t dim_ = 0;
  bool tied_ = false;
};

template <typename T>
struct DmnTrace {
  std::vector<DmnLayerTrace<T>> layers;
  std::span<const T> output() const { return layers.back().output; }
};

template <typename T>
void dmn_encode(const Memory<T>& memory, std::span<const T> query,
                const DmnEncoder<T>& encoder, const ParamRegistry<T>& registry,
                DmnTrace<T>& trace);

template <typename T>
void dmn_backward(const Memory<T>& memory, const DmnEncoder<T>& encoder,
                  ParamRegistry<T>& registry, const DmnTrace<T>& trace,
                  std::span<const T> d_output, std::span<T> d_memory,
                  std::span<T> d_query);

// Sum of the valid memory cells; zero when none are valid.
template <typename T>
void cbow_encode(const Memory<T>& memory, std::span<T> output);

template <typename T>
void cbow_backward(const Memory<T>& memory, std::span<const T> d_output,
                   std::span<T> d_memory);

}  // namespace nkge

#endif  // NKGE_DMN_H_
