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

#ifndef NKGE_GATE_H_
#define NKGE_GATE_H_

#include <span>

#include "nkge/kernels.h"

namespace nkge {

// e_j = sigmoid(g) * e_s + (1 - sigmoid(g)) * e_n, coordinatewise.
template <typename T>
void join(std::span<const T> structure, std::span<const T> neighbor,
          std::span<const T> gate, std::span<T> joint) {
  const std::size_t d = structure.size();
  ops::check_size(neighbor.size(), d, "join");
  ops::check_size(gate.size(), d, "join");
  ops::check_size(joint.size(), d, "join");
  for (std::size_t i = 0; i < d; ++i) {
    const T s = ops::sigmoid(gate[i]);
    joint[i] = s * structure[i] + (T{1} - s) * neighbor[i];
  }
  ops::check_finite<T>(joint, "join");
}

// Accumulates into any non-empty gradient span.
template <typename T>
void join_backward(std::span<const T> structure, std::span<const T> neighbor,
                   std::span<const T> gate, std::span<const T> d_joint,
                   std::span<T> d_structure, std::span<T> d_neighbor,
                   std::span<T> d_gate) {
  const std::size_t d = structure.size();
  ops::check_size(d_joint.size(), d, "join_backward");
  for (std::size_t i = 0; i < d; ++i) {
    const T s = ops::sigmoid(gate[i]);
    if (!d_structure.empty()) d_structure[i] += s * d_joint[i];
    if (!d_neighbor.empty()) d_neighbor[i] += (T{1} - s) * d_joint[i];
    if (!d_gate.empty()) {
      d_gate[i] += s * (T{1} - s) * (structure[i] - neighbor[i]) * d_joint[i];
    }
  }
}

}  // namespace nkge

#endif  // NKGE_GATE_H_
