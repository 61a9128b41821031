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

#include "nkge/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace nkge {

GradCheckReport grad_check(ParamRegistry<double>& registry,
                           const std::function<double()>& loss,
                           const std::function<void()>& accumulate_grad,
                           const GradCheckOptions& options) {
  registry.zero_grads();
  accumulate_grad();

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (auto& p : registry) {
    if (p.rule == UpdateRule::kFrozen) continue;
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 &&
        coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
    }
    for (const std::size_t i : coords) {
      const double saved = p.value[i];
      p.value[i] = saved + options.step;
      const double up = loss();
      p.value[i] = saved - options.step;
      const double down = loss();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = p.grad[i];
      const double denom = std::max(
          {std::abs(analytic), std::abs(numeric), options.magnitude_floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace nkge
