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

#ifndef NKGE_MODEL_H_
#define NKGE_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "nkge/dmn.h"
#include "nkge/kg_store.h"
#include "nkge/neighbors.h"
#include "nkge/params.h"
#include "nkge/scorers.h"

namespace nkge {

enum class Variant { kTransE, kConvE };
// kNone is plain TransE/ConvE: the joint representation is the structure
// embedding itself.
enum class EncoderKind { kNone, kCbow, kDmn };

std::string_view to_string(Variant v);
std::string_view to_string(EncoderKind e);
Variant parse_variant(std::string_view s);
EncoderKind parse_encoder(std::string_view s);

struct ModelConfig {
  Variant variant = Variant::kTransE;
  EncoderKind encoder = EncoderKind::kDmn;
  std::size_t dim = 100;
  std::size_t layers = 6;
  bool tie_layers = false;
  Dissimilarity dissimilarity = Dissimilarity::kL1;
  std::size_t entity_count = 0;
  // Base relations; the ConvE variant stores one reciprocal per relation.
  std::size_t relation_count = 0;
  ConvEConfig conve;
  double init_range = 0.01;
};

template <typename T>
struct JointTrace {
  EntityId entity = 0;
  RelationId relation = 0;
  std::vector<T> memory;
  std::vector<std::uint8_t> mask;
  DmnTrace<T> dmn;
  std::vector<T> neighbor;  // e_n
  std::vector<T> joint;     // e_j
};

// Parameters and the entity-representation path shared by both variants:
// structure, neighbor, relation and gate tables, the neighbor encoder, and
// (ConvE variant) the convolutional scorer.
template <typename T>
class NkgeModel {
 public:
  NkgeModel(const ModelConfig& config,
            std::shared_ptr<const NeighborTable> neighbors);

  const ModelConfig& config() const { return config_; }
  ParamRegistry<T>& params() { return registry_; }
  const ParamRegistry<T>& params() const { return registry_; }
  const NeighborTable* neighbors() const { return neighbors_.get(); }

  // Uniform [-range, range] everywhere, gates at 0, unit-norm structure rows
  // for the TransE variant, Xavier-uniform conv/fc weights for ConvE.
  void initialize(std::uint64_t seed);

  std::size_t relation_rows() const;
  RelationId reciprocal(RelationId r) const {
    return static_cast<RelationId>(r + config_.relation_count);
  }

  std::span<const T> structure(EntityId e) const;
  std::span<const T> relation(RelationId r) const;
  const Tensor<T>& structure_table() const;

  // e_j for entity e under relation query r.
  void joint(EntityId e, RelationId r, JointTrace<T>& trace) const;
  void joint_backward(const JointTrace<T>& trace, std::span<const T> d_joint);

  // TransE-variant score of (h, r, t); both sides joint.
  T transe(EntityId h, RelationId r, EntityId t) const;

  ConvE<T>& conve() { return *conve_; }
  const ConvE<T>& conve() const { return *conve_; }

  ParamId structure_id() const { return structure_; }
  ParamId relation_id() const { return relation_; }
  std::optional<ParamId> neighbor_id() const { return neighbor_; }
  std::optional<ParamId> gate_id() const { return gate_; }
  const DmnEncoder<T>& encoder() const { return encoder_; }

  // Projects structure rows to unit norm (TransE variant only).
  void project();

 private:
  ModelConfig config_;
  std::shared_ptr<const NeighborTable> neighbors_;
  ParamRegistry<T> registry_;
  ParamId structure_;
  ParamId relation_;
  std::optional<ParamId> neighbor_;
  std::optional<ParamId> gate_;
  DmnEncoder<T> encoder_;
  std::optional<ConvE<T>> conve_;
};

}  // namespace nkge

#endif  // NKGE_MODEL_H_
