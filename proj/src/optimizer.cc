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

#include "nkge/optimizer.h"

#include <cmath>

#include "nkge/errors.h"
#include "nkge/kernels.h"

namespace nkge {

template <typename T>
Optimizer<T>::Optimizer(const ParamRegistry<T>& registry,
                        OptimizerOptions options)
    : options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (options_.l2 < 0.0) throw ConfigError("l2 weight must be nonnegative");
  if (options_.rule == OptimizerRule::kAdam) {
    for (const auto& p : registry) {
      first_moment_.emplace_back(p.value.size(), T{0});
      second_moment_.emplace_back(p.value.size(), T{0});
    }
  }
}

template <typename T>
void Optimizer<T>::step(ParamRegistry<T>& registry) {
  ++steps_;
  const T lr = T(options_.learning_rate);
  const T decay = T(2.0 * options_.l2);
  std::size_t index = 0;
  for (auto& p : registry) {
    const std::size_t pi = index++;
    if (p.rule == UpdateRule::kFrozen) continue;
    auto theta = p.value.values();
    auto grad = p.grad.values();
    if (options_.rule == OptimizerRule::kSgd) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= lr * (grad[i] + decay * theta[i]);
      }
    } else {
      if (first_moment_.size() != registry.size()) {
        throw NumericalError("adam: registry changed after construction");
      }
      auto& m = first_moment_[pi];
      auto& v = second_moment_[pi];
      const T b1 = T(options_.beta1);
      const T b2 = T(options_.beta2);
      const T eps = T(options_.epsilon);
      const T c1 = T(1.0 - std::pow(options_.beta1, double(steps_)));
      const T c2 = T(1.0 - std::pow(options_.beta2, double(steps_)));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const T g = grad[i] + decay * theta[i];
        m[i] = b1 * m[i] + (T{1} - b1) * g;
        v[i] = b2 * v[i] + (T{1} - b2) * g * g;
        const T mhat = m[i] / c1;
        const T vhat = v[i] / c2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
    ops::check_finite<T>(theta, p.name.c_str());
    if (p.rule == UpdateRule::kUnitNormRows) project_unit_rows(p.value);
  }
}

template <typename T>
void project_unit_rows(Tensor<T>& table) {
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    double sq = 0.0;
    for (const T v : row) sq += double(v) * double(v);
    if (sq == 0.0) continue;
    const T inv = T(1.0 / std::sqrt(sq));
    for (T& v : row) v *= inv;
  }
}

template class Optimizer<float>;
template class Optimizer<double>;
template void project_unit_rows(Tensor<float>&);
template void project_unit_rows(Tensor<double>&);

}  // namespace nkge
