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

#include "nkge/dmn.h"

#include <cmath>

#include "nkge/errors.h"
#include "nkge/kernels.h"

namespace nkge {

template <typename T>
void dmn_layer(const Memory<T>& memory, std::span<const T> query,
               const DmnLayerParams<T>& params, DmnLayerTrace<T>& trace) {
  const std::size_t d = memory.dim;
  const std::size_t k = memory.slots();
  ops::check_size(query.size(), d, "dmn_layer");
  ops::check_size(memory.cells.size(), k * d, "dmn_layer");
  ops::check_size(params.att_weight.size(), 2 * d, "dmn_layer");
  ops::check_size(params.review_bias.size(), d, "dmn_layer");

  trace.query.assign(query.begin(), query.end());
  trace.pre_logits.assign(k, T{0});
  trace.weights.assign(k, T{0});
  trace.encoding.assign(d, T{0});
  trace.review.assign(d, T{0});
  trace.output.assign(d, T{0});

  const auto w_mem = params.att_weight.first(d);
  const auto w_query = params.att_weight.subspan(d, d);
  const T query_term = ops::dot(w_query, query) + params.att_bias;

  // Softmax over the valid slots only.
  T max_logit{0};
  bool any = false;
  for (std::size_t i = 0; i < k; ++i) {
    if (!memory.mask[i]) continue;
    const T a = ops::dot(w_mem, memory.cell(i)) + query_term;
    trace.pre_logits[i] = a;
    const T g = a > T{0} ? a : T{0};
    max_logit = any ? std::max(max_logit, g) : g;
    any = true;
  }
  if (any) {
    T sum{0};
    for (std::size_t i = 0; i < k; ++i) {
      if (!memory.mask[i]) continue;
      const T a = trace.pre_logits[i];
      const T g = a > T{0} ? a : T{0};
      trace.weights[i] = std::exp(g - max_logit);
      sum += trace.weights[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!memory.mask[i]) continue;
      trace.weights[i] /= sum;
      ops::axpy<T>(trace.weights[i], memory.cell(i), trace.encoding);
    }
  }

  ops::matvec(params.review_weight, query, std::span<T>(trace.review));
  for (std::size_t j = 0; j < d; ++j) trace.review[j] += params.review_bias[j];
  ops::tanh_forward<T>(trace.review, trace.review);
  for (std::size_t j = 0; j < d; ++j) {
    trace.output[j] = trace.encoding[j] + trace.review[j];
  }
  ops::check_finite<T>(trace.output, "dmn_layer");
}

template <typename T>
void dmn_layer_backward(const Memory<T>& memory,
                        const DmnLayerParams<T>& params,
                        const DmnLayerTrace<T>& trace,
                        std::span<const T> d_output,
                        const DmnLayerGrads<T>& grads, std::span<T> d_memory,
                        std::span<T> d_query) {
  const std::size_t d = memory.dim;
  const std::size_t k = memory.slots();
  ops::check_size(d_output.size(), d, "dmn_layer_backward");
  ops::check_size(d_memory.size(), k * d, "dmn_layer_backward");
  ops::check_size(d_query.size(), d, "dmn_layer_backward");

  // Review branch: u' = o + tanh(z), z = W_rev u + b_rev.
  std::vector<T> dz(d);
  for (std::size_t j = 0; j < d; ++j) {
    dz[j] = d_output[j] * (T{1} - trace.review[j] * trace.review[j]);
    grads.review_bias[j] += dz[j];
  }
  ops::matvec_backward<T>(params.review_weight, trace.query, dz,
                          grads.review_weight, d_query);

  // Attention branch: o = sum p_i n_i.
  std::vector<T> dp(k, T{0});
  T inner{0};
  for (std::size_t i = 0; i < k; ++i) {
    if (!memory.mask[i]) continue;
    const auto cell = memory.cell(i);
    dp[i] = ops::dot(cell, d_output);
    inner += trace.weights[i] * dp[i];
    ops::axpy(trace.weights[i], d_output, d_memory.subspan(i * d, d));
  }
  const auto w_mem = params.att_weight.first(d);
  T d_query_term{0};
  for (std::size_t i = 0; i < k; ++i) {
    if (!memory.mask[i]) continue;
    const T dg = trace.weights[i] * (dp[i] - inner);
    const T da = trace.pre_logits[i] > T{0} ? dg : T{0};
    if (da == T{0}) continue;
    d_query_term += da;
    ops::axpy(da, memory.cell(i), grads.att_weight.first(d));
    ops::axpy(da, w_mem, d_memory.subspan(i * d, d));
  }
  if (d_query_term != T{0}) {
    grads.att_bias[0] += d_query_term;
    ops::axpy<T>(d_query_term, trace.query, grads.att_weight.subspan(d, d));
    ops::axpy(d_query_term, params.att_weight.subspan(d, d), d_query);
  }
}

template <typename T>
DmnEncoder<T>::DmnEncoder(ParamRegistry<T>& registry, const std::string& prefix,
                          std::size_t dim, std::size_t layers, bool tied)
    : dim_(dim), tied_(tied) {
  if (layers == 0) throw ConfigError("DMN encoder needs at least one layer");
  const std::size_t distinct = tied ? 1 : layers;
  std::vector<LayerIds> ids;
  for (std::size_t l = 0; l < distinct; ++l) {
    const std::string p = prefix + ".layer" + std::to_string(l) + ".";
    ids.push_back({registry.add(p + "att_weight", {2 * dim}),
                   registry.add(p + "att_bias", {1}),
                   registry.add(p + "review_weight", {dim, dim}),
                   registry.add(p + "review_bias", {dim})});
  }
  for (std::size_t l = 0; l < layers; ++l) {
    layer_ids_.push_back(ids[tied ? 0 : l]);
  }
}

template <typename T>
DmnLayerParams<T> DmnEncoder<T>::layer_params(const ParamRegistry<T>& registry,
                                              std::size_t layer) const {
  const auto& ids = layer_ids_[layer];
  return {registry.value(ids.att_weight).values(),
          registry.value(ids.att_bias)[0],
          registry.value(ids.review_weight).values(),
          registry.value(ids.review_bias).values()};
}

template <typename T>
DmnLayerGrads<T> DmnEncoder<T>::layer_grads(ParamRegistry<T>& registry,
                                            std::size_t layer) const {
  const auto& ids = layer_ids_[layer];
  return {registry.grad(ids.att_weight).values(),
          registry.grad(ids.att_bias).values(),
          registry.grad(ids.review_weight).values(),
          registry.grad(ids.review_bias).values()};
}

template <typename T>
void dmn_encode(const Memory<T>& memory, std::span<const T> query,
                const DmnEncoder<T>& encoder, const ParamRegistry<T>& registry,
                DmnTrace<T>& trace) {
  trace.layers.resize(encoder.layers());
  std::span<const T> u = query;
  for (std::size_t l = 0; l < encoder.layers(); ++l) {
    dmn_layer(memory, u, encoder.layer_params(registry, l), trace.layers[l]);
    u = trace.layers[l].output;
  }
}

template <typename T>
void dmn_backward(const Memory<T>& memory, const DmnEncoder<T>& encoder,
                  ParamRegistry<T>& registry, const DmnTrace<T>& trace,
                  std::span<const T> d_output, std::span<T> d_memory,
                  std::span<T> d_query) {
  std::vector<T> upstream(d_output.begin(), d_output.end());
  std::vector<T> d_u(encoder.dim());
  for (std::size_t l = encoder.layers(); l-- > 0;) {
    std::fill(d_u.begin(), d_u.end(), T{0});
    dmn_layer_backward<T>(memory, encoder.layer_params(registry, l),
                          trace.layers[l], upstream,
                          encoder.layer_grads(registry, l), d_memory, d_u);
    upstream.swap(d_u);
  }
  ops::axpy<T>(T{1}, upstream, d_query);
}

template <typename T>
void cbow_encode(const Memory<T>& memory, std::span<T> output) {
  ops::check_size(output.size(), memory.dim, "cbow_encode");
  std::fill(output.begin(), output.end(), T{0});
  for (std::size_t i = 0; i < memory.slots(); ++i) {
    if (memory.mask[i]) ops::axpy(T{1}, memory.cell(i), output);
  }
}

template <typename T>
void cbow_backward(const Memory<T>& memory, std::span<const T> d_output,
                   std::span<T> d_memory) {
  const std::size_t d = memory.dim;
  for (std::size_t i = 0; i < memory.slots(); ++i) {
    if (memory.mask[i]) ops::axpy(T{1}, d_output, d_memory.subspan(i * d, d));
  }
}

#define NKGE_INSTANTIATE_DMN(T)                                              \
  template void dmn_layer(const Memory<T>&, std::span<const T>,              \
                          const DmnLayerParams<T>&, DmnLayerTrace<T>&);      \
  template void dmn_layer_backward(                                          \
      const Memory<T>&, const DmnLayerParams<T>&, const DmnLayerTrace<T>&,   \
      std::span<const T>, const DmnLayerGrads<T>&, std::span<T>,             \
      std::span<T>);                                                         \
  template class DmnEncoder<T>;                                              \
  template void dmn_encode(const Memory<T>&, std::span<const T>,             \
                           const DmnEncoder<T>&, const ParamRegistry<T>&,    \
                           DmnTrace<T>&);                                    \
  template void dmn_backward(const Memory<T>&, const DmnEncoder<T>&,         \
                             ParamRegistry<T>&, const DmnTrace<T>&,          \
                             std::span<const T>, std::span<T>, std::span<T>); \
  template void cbow_encode(const Memory<T>&, std::span<T>);                 \
  template void cbow_backward(const Memory<T>&, std::span<const T>,          \
                              std::span<T>);

NKGE_INSTANTIATE_DMN(float)
NKGE_INSTANTIATE_DMN(double)

#undef NKGE_INSTANTIATE_DMN

}  // namespace nkge
