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

#include "nkge/scorers.h"

#include <Eigen/Core>
#include <cmath>

#include "nkge/errors.h"

namespace nkge {

std::string_view to_string(Dissimilarity d) {
  return d == Dissimilarity::kL1 ? "L1" : "L2sq";
}

Dissimilarity parse_dissimilarity(std::string_view s) {
  if (s == "L1" || s == "l1") return Dissimilarity::kL1;
  if (s == "L2sq" || s == "l2sq" || s == "L2" || s == "l2") {
    return Dissimilarity::kL2Squared;
  }
  throw ConfigError("unknown dissimilarity: " + std::string(s));
}

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMatrix = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMapMatrix = Eigen::Map<const RowMatrix<T>>;

// Batch-norm over `channels` channels; element (n, c, s) lives at
// n * channels * spatial + c * spatial + s.
template <typename T>
void batch_norm_forward(std::span<const T> x, std::size_t batch,
                        std::size_t channels, std::size_t spatial,
                        std::span<const T> scale, std::span<const T> shift,
                        std::span<const T> running_mean,
                        std::span<const T> running_var, bool training,
                        double eps, double momentum, std::span<T> x_hat,
                        std::span<T> y, std::span<T> inv_std,
                        std::span<T> new_mean, std::span<T> new_var) {
  const std::size_t count = batch * spatial;
  for (std::size_t c = 0; c < channels; ++c) {
    double mean, var;
    if (training) {
      double sum = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = x.data() + (n * channels + c) * spatial;
        for (std::size_t s = 0; s < spatial; ++s) sum += p[s];
      }
      mean = sum / double(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* p = x.data() + (n * channels + c) * spatial;
        for (std::size_t s = 0; s < spatial; ++s) {
          const double dv = p[s] - mean;
          sq += dv * dv;
        }
      }
      var = sq / double(count);
      if (!new_mean.empty()) {
        const double unbiased =
            count > 1 ? var * double(count) / double(count - 1) : var;
        new_mean[c] = T((1.0 - momentum) * running_mean[c] + momentum * mean);
        new_var[c] = T((1.0 - momentum) * running_var[c] + momentum * unbiased);
      }
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const T inv = T(1.0 / std::sqrt(var + eps));
    inv_std[c] = inv;
    const T m = T(mean);
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * spatial;
      for (std::size_t s = 0; s < spatial; ++s) {
        const T h = (x[base + s] - m) * inv;
        x_hat[base + s] = h;
        y[base + s] = scale[c] * h + shift[c];
      }
    }
  }
}

template <typename T>
void batch_norm_backward(std::span<const T> x_hat, std::span<const T> dy,
                         std::size_t batch, std::size_t channels,
                         std::size_t spatial, std::span<const T> scale,
                         std::span<const T> inv_std, bool training,
                         std::span<T> d_scale, std::span<T> d_shift,
                         std::span<T> dx) {
  const std::size_t count = batch * spatial;
  for (std::size_t c = 0; c < channels; ++c) {
    T sum_dy{0}, sum_dy_xhat{0};
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * spatial;
      for (std::size_t s = 0; s < spatial; ++s) {
        sum_dy += dy[base + s];
        sum_dy_xhat += dy[base + s] * x_hat[base + s];
      }
    }
    d_scale[c] += sum_dy_xhat;
    d_shift[c] += sum_dy;
    const T g = scale[c] * inv_std[c];
    const T inv_count = T{1} / T(count);
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * spatial;
      for (std::size_t s = 0; s < spatial; ++s) {
        if (training) {
          dx[base + s] =
              g * (dy[base + s] - inv_count * sum_dy -
                   inv_count * x_hat[base + s] * sum_dy_xhat);
        } else {
          dx[base + s] = g * dy[base + s];
        }
      }
    }
  }
}

template <typename T>
void draw_dropout(std::size_t n, double p, std::mt19937_64& rng,
                  std::vector<T>& mask) {
  mask.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const T keep_scale = T(1.0 / (1.0 - p));
  for (auto& m : mask) m = unif(rng) < p ? T{0} : keep_scale;
}

}  // namespace

template <typename T>
ConvE<T>::ConvE(ParamRegistry<T>& registry, const std::string& prefix,
                const ConvEConfig& config, std::size_t entity_count)
    : config_(config), entity_count_(entity_count) {
  if (config.reshape_height * config.reshape_width != config.dim) {
    throw ConfigError("ConvE reshape " + std::to_string(config.reshape_height) +
                      "x" + std::to_string(config.reshape_width) +
                      " does not factor dimension " +
                      std::to_string(config.dim));
  }
  if (config.kernel > config.reshape_width ||
      config.kernel > 2 * config.reshape_height) {
    throw ConfigError("ConvE kernel larger than the reshaped input");
  }
  const std::size_t f = config.filters;
  const std::size_t d = config.dim;
  const std::string p = prefix + ".";
  ids_.conv_weight = registry.add(p + "conv_weight",
                                  {f, 1, config.kernel, config.kernel});
  ids_.conv_bias = registry.add(p + "conv_bias", {f});
  ids_.fc_weight = registry.add(p + "fc_weight", {d, flat_size()});
  ids_.fc_bias = registry.add(p + "fc_bias", {d});
  ids_.entity_bias = registry.add(p + "entity_bias", {entity_count});
  auto add_bn = [&](const std::string& name, std::size_t c, ParamId& scale,
                    ParamId& shift, ParamId& mean, ParamId& var) {
    scale = registry.add(p + name + "_scale", {c});
    shift = registry.add(p + name + "_shift", {c});
    mean = registry.add(p + name + "_running_mean", {c}, UpdateRule::kFrozen);
    var = registry.add(p + name + "_running_var", {c}, UpdateRule::kFrozen);
  };
  add_bn("bn0", 1, ids_.bn0_scale, ids_.bn0_shift, ids_.bn0_mean, ids_.bn0_var);
  add_bn("bn1", f, ids_.bn1_scale, ids_.bn1_shift, ids_.bn1_mean, ids_.bn1_var);
  add_bn("bn2", d, ids_.bn2_scale, ids_.bn2_shift, ids_.bn2_mean, ids_.bn2_var);
  reset_normalization(registry);
}

template <typename T>
void ConvE<T>::reset_normalization(ParamRegistry<T>& registry) const {
  for (const auto id : {ids_.bn0_scale, ids_.bn1_scale, ids_.bn2_scale,
                        ids_.bn0_var, ids_.bn1_var, ids_.bn2_var}) {
    registry.value(id).fill(T{1});
  }
  for (const auto id : {ids_.bn0_shift, ids_.bn1_shift, ids_.bn2_shift,
                        ids_.bn0_mean, ids_.bn1_mean, ids_.bn2_mean,
                        ids_.conv_bias, ids_.fc_bias, ids_.entity_bias}) {
    registry.value(id).fill(T{0});
  }
}

template <typename T>
void ConvE<T>::forward(ParamRegistry<T>& registry, std::span<const T> heads,
                       std::span<const T> relations, std::span<const T> tails,
                       std::size_t batch, Phase phase, std::mt19937_64* rng,
                       ConvETrace<T>& trace, std::span<T> scores) const {
  run_forward(registry, heads, relations, tails, batch, phase, rng, trace,
              scores, phase == Phase::kTrain ? &registry : nullptr);
}

template <typename T>
void ConvE<T>::score_all(const ParamRegistry<T>& registry,
                         std::span<const T> head, std::span<const T> relation,
                         std::span<const T> tails, std::span<T> scores) const {
  ConvETrace<T> trace;
  run_forward(registry, head, relation, tails, 1, Phase::kEval, nullptr, trace,
              scores, nullptr);
}

template <typename T>
void ConvE<T>::run_forward(const ParamRegistry<T>& registry,
                           std::span<const T> heads,
                           std::span<const T> relations,
                           std::span<const T> tails, std::size_t batch,
                           Phase phase, std::mt19937_64* rng,
                           ConvETrace<T>& trace, std::span<T> scores,
                           ParamRegistry<T>* stats_out) const {
  const std::size_t d = config_.dim;
  const std::size_t in_h = 2 * config_.reshape_height;
  const std::size_t in_w = config_.reshape_width;
  const std::size_t in_size = in_h * in_w;
  const std::size_t k = config_.kernel;
  const std::size_t oh = feature_height();
  const std::size_t ow = feature_width();
  const std::size_t fmap = oh * ow;
  const std::size_t nf = config_.filters;
  const std::size_t flat = flat_size();
  const std::size_t ne = tails.size() / d;
  ops::check_size(heads.size(), batch * d, "conve_forward");
  ops::check_size(relations.size(), batch * d, "conve_forward");
  ops::check_size(tails.size(), entity_count_ * d, "conve_forward");
  ops::check_size(scores.size(), batch * ne, "conve_forward");

  const bool training = phase == Phase::kTrain;
  const bool dropout = training && rng != nullptr;
  trace.batch = batch;
  trace.training = training;

  // Stack [h; r]: vertical stacking of row-major reshapes is concatenation.
  trace.input.resize(batch * in_size);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(heads.data() + b * d, d, trace.input.data() + b * in_size);
    std::copy_n(relations.data() + b * d, d,
                trace.input.data() + b * in_size + d);
  }

  auto value = [&](ParamId id) { return registry.value(id).values(); };
  auto stat_out = [&](ParamId id) {
    return stats_out ? stats_out->value(id).values() : std::span<T>{};
  };

  trace.input_hat.resize(batch * in_size);
  trace.conv_in.resize(batch * in_size);
  trace.bn0_inv_std.resize(1);
  // Running statistics are read before being overwritten; copy them so the
  // in-place update cannot alias the read.
  const std::vector<T> m0(value(ids_.bn0_mean).begin(),
                          value(ids_.bn0_mean).end());
  const std::vector<T> v0(value(ids_.bn0_var).begin(),
                          value(ids_.bn0_var).end());
  batch_norm_forward<T>(trace.input, batch, 1, in_size, value(ids_.bn0_scale),
                        value(ids_.bn0_shift), m0, v0, training,
                        config_.bn_epsilon, config_.bn_momentum,
                        trace.input_hat, trace.conv_in, trace.bn0_inv_std,
                        stat_out(ids_.bn0_mean), stat_out(ids_.bn0_var));
  trace.input_mask.clear();
  if (dropout && config_.input_dropout > 0.0) {
    draw_dropout(trace.conv_in.size(), config_.input_dropout, *rng,
                 trace.input_mask);
    for (std::size_t i = 0; i < trace.conv_in.size(); ++i) {
      trace.conv_in[i] *= trace.input_mask[i];
    }
  }

  // Valid convolution, stride 1.
  std::vector<T> conv(batch * nf * fmap);
  const auto w = value(ids_.conv_weight);
  const auto cb = value(ids_.conv_bias);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* img = trace.conv_in.data() + b * in_size;
    for (std::size_t f = 0; f < nf; ++f) {
      T* out = conv.data() + (b * nf + f) * fmap;
      const T* wf = w.data() + f * k * k;
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          T acc = cb[f];
          for (std::size_t u = 0; u < k; ++u) {
            const T* row = img + (i + u) * in_w + j;
            for (std::size_t v = 0; v < k; ++v) acc += wf[u * k + v] * row[v];
          }
          out[i * ow + j] = acc;
        }
      }
    }
  }
  trace.conv_hat.resize(conv.size());
  trace.conv_act.resize(conv.size());
  trace.bn1_inv_std.resize(nf);
  const std::vector<T> m1(value(ids_.bn1_mean).begin(),
                          value(ids_.bn1_mean).end());
  const std::vector<T> v1(value(ids_.bn1_var).begin(),
                          value(ids_.bn1_var).end());
  batch_norm_forward<T>(conv, batch, nf, fmap, value(ids_.bn1_scale),
                        value(ids_.bn1_shift), m1, v1, training,
                        config_.bn_epsilon, config_.bn_momentum,
                        trace.conv_hat, trace.conv_act, trace.bn1_inv_std,
                        stat_out(ids_.bn1_mean), stat_out(ids_.bn1_var));
  trace.features.resize(conv.size());
  trace.feature_mask.clear();
  if (dropout && config_.feature_dropout > 0.0) {
    draw_dropout(conv.size(), config_.feature_dropout, *rng,
                 trace.feature_mask);
  }
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const T a = trace.conv_act[i];
    T v = a > T{0} ? a : T{0};
    if (!trace.feature_mask.empty()) v *= trace.feature_mask[i];
    trace.features[i] = v;
  }

  // Fully connected projection back to d.
  std::vector<T> fc(batch * d);
  {
    ConstMapMatrix<T> feat(trace.features.data(), batch, flat);
    ConstMapMatrix<T> wfc(value(ids_.fc_weight).data(), d, flat);
    MapMatrix<T> out(fc.data(), batch, d);
    out.noalias() = feat * wfc.transpose();
    const auto fb = value(ids_.fc_bias);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < d; ++j) fc[b * d + j] += fb[j];
    }
  }
  trace.hidden_hat.resize(fc.size());
  trace.hidden_act.resize(fc.size());
  trace.bn2_inv_std.resize(d);
  const std::vector<T> m2(value(ids_.bn2_mean).begin(),
                          value(ids_.bn2_mean).end());
  const std::vector<T> v2(value(ids_.bn2_var).begin(),
                          value(ids_.bn2_var).end());
  batch_norm_forward<T>(fc, batch, d, 1, value(ids_.bn2_scale),
                        value(ids_.bn2_shift), m2, v2, training,
                        config_.bn_epsilon, config_.bn_momentum,
                        trace.hidden_hat, trace.hidden_act, trace.bn2_inv_std,
                        stat_out(ids_.bn2_mean), stat_out(ids_.bn2_var));
  trace.hidden.resize(fc.size());
  trace.hidden_mask.clear();
  if (dropout && config_.hidden_dropout > 0.0) {
    draw_dropout(fc.size(), config_.hidden_dropout, *rng, trace.hidden_mask);
  }
  for (std::size_t i = 0; i < fc.size(); ++i) {
    const T a = trace.hidden_act[i];
    T v = a > T{0} ? a : T{0};
    if (!trace.hidden_mask.empty()) v *= trace.hidden_mask[i];
    trace.hidden[i] = v;
  }

  // 1-N scoring against every tail.
  {
    ConstMapMatrix<T> hid(trace.hidden.data(), batch, d);
    ConstMapMatrix<T> tab(tails.data(), ne, d);
    MapMatrix<T> out(scores.data(), batch, ne);
    out.noalias() = hid * tab.transpose();
    const auto eb = value(ids_.entity_bias);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t e = 0; e < ne; ++e) scores[b * ne + e] += eb[e];
    }
  }
  ops::check_finite<T>(scores, "conve_forward");
}

template <typename T>
void ConvE<T>::backward(ParamRegistry<T>& registry, std::span<const T> tails,
                        const ConvETrace<T>& trace,
                        std::span<const T> d_scores, std::span<T> d_heads,
                        std::span<T> d_relations, std::span<T> d_tails) const {
  const std::size_t batch = trace.batch;
  const std::size_t d = config_.dim;
  const std::size_t in_h = 2 * config_.reshape_height;
  const std::size_t in_w = config_.reshape_width;
  const std::size_t in_size = in_h * in_w;
  const std::size_t k = config_.kernel;
  const std::size_t oh = feature_height();
  const std::size_t ow = feature_width();
  const std::size_t fmap = oh * ow;
  const std::size_t nf = config_.filters;
  const std::size_t flat = flat_size();
  const std::size_t ne = tails.size() / d;
  ops::check_size(d_scores.size(), batch * ne, "conve_backward");
  const bool training = trace.training;

  auto value = [&](ParamId id) {
    return std::span<const T>(registry.value(id).values());
  };
  auto grad = [&](ParamId id) { return registry.grad(id).values(); };

  // Scores = hidden * tails^T + bias.
  std::vector<T> d_hidden(batch * d);
  {
    ConstMapMatrix<T> ds(d_scores.data(), batch, ne);
    ConstMapMatrix<T> tab(tails.data(), ne, d);
    MapMatrix<T> dh(d_hidden.data(), batch, d);
    dh.noalias() = ds * tab;
    if (!d_tails.empty()) {
      ConstMapMatrix<T> hid(trace.hidden.data(), batch, d);
      MapMatrix<T> dt(d_tails.data(), ne, d);
      dt.noalias() += ds.transpose() * hid;
    }
    auto eb = grad(ids_.entity_bias);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t e = 0; e < ne; ++e) eb[e] += d_scores[b * ne + e];
    }
  }
  for (std::size_t i = 0; i < d_hidden.size(); ++i) {
    if (!trace.hidden_mask.empty()) d_hidden[i] *= trace.hidden_mask[i];
    if (!(trace.hidden_act[i] > T{0})) d_hidden[i] = T{0};
  }
  std::vector<T> d_fc(batch * d);
  batch_norm_backward<T>(trace.hidden_hat, d_hidden, batch, d, 1,
                         value(ids_.bn2_scale), trace.bn2_inv_std, training,
                         grad(ids_.bn2_scale), grad(ids_.bn2_shift), d_fc);

  std::vector<T> d_features(batch * flat);
  {
    ConstMapMatrix<T> dfc(d_fc.data(), batch, d);
    ConstMapMatrix<T> feat(trace.features.data(), batch, flat);
    ConstMapMatrix<T> wfc(registry.value(ids_.fc_weight).data(), d, flat);
    MapMatrix<T> dw(registry.grad(ids_.fc_weight).data(), d, flat);
    dw.noalias() += dfc.transpose() * feat;
    MapMatrix<T> dfeat(d_features.data(), batch, flat);
    dfeat.noalias() = dfc * wfc;
    auto fb = grad(ids_.fc_bias);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < d; ++j) fb[j] += d_fc[b * d + j];
    }
  }
  for (std::size_t i = 0; i < d_features.size(); ++i) {
    if (!trace.feature_mask.empty()) d_features[i] *= trace.feature_mask[i];
    if (!(trace.conv_act[i] > T{0})) d_features[i] = T{0};
  }
  std::vector<T> d_conv(batch * nf * fmap);
  batch_norm_backward<T>(trace.conv_hat, d_features, batch, nf, fmap,
                         value(ids_.bn1_scale), trace.bn1_inv_std, training,
                         grad(ids_.bn1_scale), grad(ids_.bn1_shift), d_conv);

  std::vector<T> d_conv_in(batch * in_size, T{0});
  const auto w = value(ids_.conv_weight);
  auto dw = grad(ids_.conv_weight);
  auto dcb = grad(ids_.conv_bias);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* img = trace.conv_in.data() + b * in_size;
    T* dimg = d_conv_in.data() + b * in_size;
    for (std::size_t f = 0; f < nf; ++f) {
      const T* dout = d_conv.data() + (b * nf + f) * fmap;
      const T* wf = w.data() + f * k * k;
      T* dwf = dw.data() + f * k * k;
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          const T g = dout[i * ow + j];
          if (g == T{0}) continue;
          dcb[f] += g;
          for (std::size_t u = 0; u < k; ++u) {
            const T* row = img + (i + u) * in_w + j;
            T* drow = dimg + (i + u) * in_w + j;
            for (std::size_t v = 0; v < k; ++v) {
              dwf[u * k + v] += g * row[v];
              drow[v] += g * wf[u * k + v];
            }
          }
        }
      }
    }
  }
  if (!trace.input_mask.empty()) {
    for (std::size_t i = 0; i < d_conv_in.size(); ++i) {
      d_conv_in[i] *= trace.input_mask[i];
    }
  }
  std::vector<T> d_input(batch * in_size);
  batch_norm_backward<T>(trace.input_hat, d_conv_in, batch, 1, in_size,
                         value(ids_.bn0_scale), trace.bn0_inv_std, training,
                         grad(ids_.bn0_scale), grad(ids_.bn0_shift), d_input);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!d_heads.empty()) d_heads[b * d + j] += d_input[b * in_size + j];
      if (!d_relations.empty()) {
        d_relations[b * d + j] += d_input[b * in_size + d + j];
      }
    }
  }
}

template class ConvE<float>;
template class ConvE<double>;

}  // namespace nkge
