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

#ifndef NKGE_PARAMS_H_
#define NKGE_PARAMS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nkge/tensor.h"

namespace nkge {

// How the optimizer treats a parameter.
enum class UpdateRule {
  kDefault,       // gradient step plus L2 decay
  kUnitNormRows,  // as kDefault, then every row is projected to unit L2 norm
  kFrozen,        // never updated (running statistics, fixed tables)
};

struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  UpdateRule rule = UpdateRule::kDefault;
};

// Owns every trainable tensor of a model together with a same-shape gradient
// accumulator.
template <typename T>
class ParamRegistry {
 public:
  ParamId add(std::string name, std::vector<std::size_t> shape,
              UpdateRule rule = UpdateRule::kDefault) {
    if (find(name)) throw ConfigError("duplicate parameter name: " + name);
    Param<T> p;
    p.name = std::move(name);
    p.value = Tensor<T>(shape);
    p.grad = Tensor<T>(std::move(shape));
    p.rule = rule;
    params_.push_back(std::move(p));
    return ParamId{params_.size() - 1};
  }

  std::optional<ParamId> find(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return ParamId{i};
    }
    return std::nullopt;
  }

  Tensor<T>& value(ParamId id) { return params_[id.index].value; }
  const Tensor<T>& value(ParamId id) const { return params_[id.index].value; }
  Tensor<T>& grad(ParamId id) { return params_[id.index].grad; }
  const Tensor<T>& grad(ParamId id) const { return params_[id.index].grad; }

  Param<T>& param(ParamId id) { return params_[id.index]; }
  const Param<T>& param(ParamId id) const { return params_[id.index]; }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grads() {
    for (auto& p : params_) p.grad.fill(T{0});
  }

  // Sum of squares over every non-frozen parameter, i.e. ||Theta||_2^2.
  double squared_norm() const {
    double sum = 0.0;
    for (const auto& p : params_) {
      if (p.rule == UpdateRule::kFrozen) continue;
      for (const T v : p.value.values()) sum += double(v) * double(v);
    }
    return sum;
  }

  // Copies values from a registry with identical names and shapes, possibly
  // of another scalar type.
  template <typename U>
  void assign_values(const ParamRegistry<U>& other) {
    for (auto& p : params_) {
      const auto id = other.find(p.name);
      if (!id) throw ConfigError("missing parameter: " + p.name);
      const auto& src = other.value(*id);
      if (src.shape() != p.value.shape()) {
        throw ConfigError("shape mismatch for parameter: " + p.name);
      }
      for (std::size_t i = 0; i < src.size(); ++i) p.value[i] = T(src[i]);
    }
  }

 private:
  std::vector<Param<T>> params_;
};

}  // namespace nkge

#endif  // NKGE_PARAMS_H_
