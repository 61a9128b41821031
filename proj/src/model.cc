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

#include "nkge/model.h"

#include <cmath>

#include "nkge/errors.h"
#include "nkge/gate.h"
#include "nkge/optimizer.h"

namespace nkge {

std::string_view to_string(Variant v) {
  return v == Variant::kTransE ? "transe" : "conve";
}

std::string_view to_string(EncoderKind e) {
  switch (e) {
    case EncoderKind::kNone:
      return "none";
    case EncoderKind::kCbow:
      return "cbow";
    case EncoderKind::kDmn:
      return "dmn";
  }
  return "dmn";
}

Variant parse_variant(std::string_view s) {
  if (s == "transe") return Variant::kTransE;
  if (s == "conve") return Variant::kConvE;
  throw ConfigError("unknown variant: " + std::string(s));
}

EncoderKind parse_encoder(std::string_view s) {
  if (s == "none") return EncoderKind::kNone;
  if (s == "cbow") return EncoderKind::kCbow;
  if (s == "dmn") return EncoderKind::kDmn;
  throw ConfigError("unknown encoder: " + std::string(s));
}

template <typename T>
NkgeModel<T>::NkgeModel(const ModelConfig& config,
                        std::shared_ptr<const NeighborTable> neighbors)
    : config_(config), neighbors_(std::move(neighbors)) {
  const std::size_t ne = config.entity_count;
  const std::size_t d = config.dim;
  if (ne == 0 || d == 0) throw ConfigError("model needs entities and dim > 0");
  if (config.encoder != EncoderKind::kNone) {
    if (!neighbors_) throw ConfigError("neighbor encoder needs a neighbor table");
    if (neighbors_->entity_count() != ne) {
      throw ConfigError("neighbor table does not match the entity count");
    }
  }
  structure_ = registry_.add("entity.structure", {ne, d},
                             config.variant == Variant::kTransE
                                 ? UpdateRule::kUnitNormRows
                                 : UpdateRule::kDefault);
  relation_ = registry_.add("relation.embedding", {relation_rows(), d});
  if (config.encoder != EncoderKind::kNone) {
    neighbor_ = registry_.add("entity.neighbor", {ne, d});
    gate_ = registry_.add("entity.gate", {ne, d});
  }
  if (config.encoder == EncoderKind::kDmn) {
    encoder_ = DmnEncoder<T>(registry_, "dmn", d, config.layers,
                             config.tie_layers);
  }
  if (config.variant == Variant::kConvE) {
    ConvEConfig cc = config.conve;
    cc.dim = d;
    config_.conve = cc;
    conve_.emplace(registry_, "conve", cc, ne);
  }
}

template <typename T>
std::size_t NkgeModel<T>::relation_rows() const {
  return config_.variant == Variant::kConvE ? 2 * config_.relation_count
                                            : config_.relation_count;
}

template <typename T>
void NkgeModel<T>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-config_.init_range,
                                              config_.init_range);
  for (auto& p : registry_) {
    if (p.rule == UpdateRule::kFrozen) continue;
    for (T& v : p.value.values()) v = T(unif(rng));
  }
  if (gate_) registry_.value(*gate_).fill(T{0});
  if (conve_) {
    conve_->reset_normalization(registry_);
    auto xavier = [&](ParamId id, double fan_in, double fan_out) {
      const double a = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-a, a);
      for (T& v : registry_.value(id).values()) v = T(u(rng));
    };
    const auto& cc = conve_->config();
    const double kk = double(cc.kernel * cc.kernel);
    xavier(conve_->ids().conv_weight, kk, kk * double(cc.filters));
    xavier(conve_->ids().fc_weight, double(conve_->flat_size()),
           double(config_.dim));
    const double emb =
        std::sqrt(6.0 / double(config_.entity_count + config_.dim));
    std::uniform_real_distribution<double> ue(-emb, emb);
    for (T& v : registry_.value(structure_).values()) v = T(ue(rng));
    for (T& v : registry_.value(relation_).values()) v = T(ue(rng));
  }
  project();
}

template <typename T>
void NkgeModel<T>::project() {
  if (config_.variant == Variant::kTransE) {
    project_unit_rows(registry_.value(structure_));
  }
}

template <typename T>
std::span<const T> NkgeModel<T>::structure(EntityId e) const {
  return registry_.value(structure_).row(e);
}

template <typename T>
std::span<const T> NkgeModel<T>::relation(RelationId r) const {
  return registry_.value(relation_).row(r);
}

template <typename T>
const Tensor<T>& NkgeModel<T>::structure_table() const {
  return registry_.value(structure_);
}

template <typename T>
void NkgeModel<T>::joint(EntityId e, RelationId r, JointTrace<T>& trace) const {
  const std::size_t d = config_.dim;
  trace.entity = e;
  trace.relation = r;
  const auto es = structure(e);
  if (config_.encoder == EncoderKind::kNone) {
    trace.joint.assign(es.begin(), es.end());
    return;
  }
  const auto ids = neighbors_->ids(e);
  const auto& table = registry_.value(*neighbor_);
  trace.memory.resize(ids.size() * d);
  trace.mask.assign(ids.size(), 1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = table.row(ids[i]);
    std::copy(row.begin(), row.end(), trace.memory.begin() + i * d);
  }
  const Memory<T> memory{trace.memory, trace.mask, d};
  trace.neighbor.resize(d);
  if (config_.encoder == EncoderKind::kDmn) {
    dmn_encode(memory, relation(r), encoder_, registry_, trace.dmn);
    const auto out = trace.dmn.output();
    std::copy(out.begin(), out.end(), trace.neighbor.begin());
  } else {
    cbow_encode(memory, std::span<T>(trace.neighbor));
  }
  trace.joint.resize(d);
  join<T>(es, trace.neighbor, registry_.value(*gate_).row(e), trace.joint);
}

template <typename T>
void NkgeModel<T>::joint_backward(const JointTrace<T>& trace,
                                  std::span<const T> d_joint) {
  const std::size_t d = config_.dim;
  const EntityId e = trace.entity;
  auto d_structure = registry_.grad(structure_).row(e);
  if (config_.encoder == EncoderKind::kNone) {
    ops::axpy(T{1}, d_joint, d_structure);
    return;
  }
  std::vector<T> d_neighbor(d, T{0});
  join_backward<T>(structure(e), trace.neighbor,
                   registry_.value(*gate_).row(e), d_joint, d_structure,
                   d_neighbor, registry_.grad(*gate_).row(e));
  const Memory<T> memory{trace.memory, trace.mask, d};
  std::vector<T> d_memory(trace.memory.size(), T{0});
  if (config_.encoder == EncoderKind::kDmn) {
    dmn_backward<T>(memory, encoder_, registry_, trace.dmn, d_neighbor,
                    d_memory, registry_.grad(relation_).row(trace.relation));
  } else {
    cbow_backward<T>(memory, d_neighbor, d_memory);
  }
  const auto ids = neighbors_->ids(e);
  auto& grad_table = registry_.grad(*neighbor_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ops::axpy<T>(T{1}, std::span<const T>(d_memory).subspan(i * d, d),
                 grad_table.row(ids[i]));
  }
}

template <typename T>
T NkgeModel<T>::transe(EntityId h, RelationId r, EntityId t) const {
  JointTrace<T> th, tt;
  joint(h, r, th);
  joint(t, r, tt);
  return transe_score<T>(th.joint, relation(r), tt.joint,
                         config_.dissimilarity);
}

template class NkgeModel<float>;
template class NkgeModel<double>;

}  // namespace nkge
