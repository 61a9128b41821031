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

#ifndef NKGE_GRAD_CHECK_H_
#define NKGE_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "nkge/params.h"

namespace nkge {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  // Gradients smaller than this are compared on an absolute scale:
  // error = |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double magnitude_floor = 1e-4;
  std::uint64_t seed = 7;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

// Compares the analytic gradient to central differences.
//
// `loss` evaluates the scalar objective at the registry's current values.
// `accumulate_grad` runs forward and backward, adding into the registry's
// gradient accumulators (the checker zeroes them first).
GradCheckReport grad_check(ParamRegistry<double>& registry,
                           const std::function<double()>& loss,
                           const std::function<void()>& accumulate_grad,
                           const GradCheckOptions& options = {});

}  // namespace nkge

#endif  // NKGE_GRAD_CHECK_H_
