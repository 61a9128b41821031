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

#ifndef NKGE_OPTIMIZER_H_
#define NKGE_OPTIMIZER_H_

#include <vector>

#include "nkge/params.h"

namespace nkge {

enum class OptimizerRule { kSgd, kAdam };

struct OptimizerOptions {
  OptimizerRule rule = OptimizerRule::kSgd;
  double learning_rate = 0.001;
  double l2 = 0.0;  // eta; the decay term is 2 * eta * theta
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// SGD or Adam over a registry. The L2 penalty eta * ||Theta||^2 enters as an
// extra gradient term rather than through the loss value.
template <typename T>
class Optimizer {
 public:
  Optimizer(const ParamRegistry<T>& registry, OptimizerOptions options);

  void step(ParamRegistry<T>& registry);

  const OptimizerOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  long steps() const { return steps_; }

 private:
  OptimizerOptions options_;
  long steps_ = 0;
  std::vector<std::vector<T>> first_moment_;
  std::vector<std::vector<T>> second_moment_;
};

// Rescales every row of a rank-2 tensor to unit L2 norm. Zero rows are left
// untouched.
template <typename T>
void project_unit_rows(Tensor<T>& table);

}  // namespace nkge

#endif  // NKGE_OPTIMIZER_H_
