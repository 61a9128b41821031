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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "nkge/checkpoint.h"
#include "nkge/errors.h"
#include "nkge/grad_check.h"
#include "nkge/optimizer.h"
#include "nkge/params.h"
#include "test_util.h"

namespace nkge {
namespace {

TEST(Tensor, ValueCountIsProductOfShape) {
  Tensor<float> t({3, 4, 2});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(Tensor<float>::element_count({5, 0}), 0u);
}

TEST(Registry, DuplicateNamesAreRejected) {
  ParamRegistry<double> r;
  r.add("w", {2});
  EXPECT_THROW(r.add("w", {3}), ConfigError);
}

TEST(Registry, GradientShapeMatchesValue) {
  ParamRegistry<double> r;
  const ParamId id = r.add("w", {3, 5});
  EXPECT_EQ(r.grad(id).shape(), r.value(id).shape());
}

TEST(Registry, ZeroGradsResetsExactly) {
  ParamRegistry<double> r;
  const ParamId a = r.add("a", {4});
  const ParamId b = r.add("b", {2, 2});
  r.grad(a).fill(0.3);
  r.grad(b).fill(-7.0);
  r.zero_grads();
  for (const auto& p : r) {
    for (double g : p.grad.values()) EXPECT_EQ(g, 0.0);
  }
}

TEST(Optimizer, ZeroGradientAndNoDecayLeavesParameters) {
  ParamRegistry<double> r;
  const ParamId id = r.add("w", {3});
  testing::randomize(r, 1);
  const std::vector<double> before(r.value(id).values().begin(),
                                   r.value(id).values().end());
  for (OptimizerRule rule : {OptimizerRule::kSgd, OptimizerRule::kAdam}) {
    Optimizer<double> opt(r, {.rule = rule, .learning_rate = 0.1, .l2 = 0});
    opt.step(r);
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_EQ(r.value(id)[i], before[i]);
    }
  }
}

TEST(Optimizer, SgdArithmetic) {
  ParamRegistry<double> r;
  const ParamId id = r.add("theta", {1});
  r.value(id)[0] = 1.0;
  r.grad(id)[0] = 1.0;
  Optimizer<double> opt(r, {.rule = OptimizerRule::kSgd, .learning_rate = 0.1});
  opt.step(r);
  EXPECT_DOUBLE_EQ(r.value(id)[0], 0.9);
}

TEST(Optimizer, SgdDecayTerm) {
  // theta - lr * (g + 2 * eta * theta) = 2 - 0.1 * (0.5 + 2 * 0.25 * 2)
  ParamRegistry<double> r;
  const ParamId id = r.add("theta", {1});
  r.value(id)[0] = 2.0;
  r.grad(id)[0] = 0.5;
  Optimizer<double> opt(
      r, {.rule = OptimizerRule::kSgd, .learning_rate = 0.1, .l2 = 0.25});
  opt.step(r);
  EXPECT_DOUBLE_EQ(r.value(id)[0], 2.0 - 0.1 * (0.5 + 1.0));
}

TEST(Optimizer, FrozenParametersNeverMove) {
  ParamRegistry<double> r;
  const ParamId id = r.add("stat", {2}, UpdateRule::kFrozen);
  r.value(id).fill(3.0);
  r.grad(id).fill(1.0);
  Optimizer<double> opt(r, {.rule = OptimizerRule::kAdam, .l2 = 1.0});
  opt.step(r);
  EXPECT_EQ(r.value(id)[0], 3.0);
}

TEST(Optimizer, AdamMinimizesQuadraticBowl) {
  ParamRegistry<double> r;
  const ParamId id = r.add("theta", {4});
  r.value(id)[0] = 1.0;
  r.value(id)[1] = -2.0;
  r.value(id)[2] = 0.5;
  r.value(id)[3] = 3.0;
  Optimizer<double> opt(r, {.rule = OptimizerRule::kAdam,
                            .learning_rate = 0.05});
  for (int step = 0; step < 1000; ++step) {
    r.zero_grads();
    for (std::size_t i = 0; i < 4; ++i) r.grad(id)[i] = 2.0 * r.value(id)[i];
    opt.step(r);
  }
  for (double v : r.value(id).values()) EXPECT_LT(std::abs(v), 1e-3);
}

TEST(Optimizer, AdamFirstStepMatchesHandComputation) {
  // With bias correction the first step is lr * g / (|g| + eps).
  ParamRegistry<double> r;
  const ParamId id = r.add("theta", {1});
  r.value(id)[0] = 1.0;
  r.grad(id)[0] = 0.2;
  Optimizer<double> opt(r, {.rule = OptimizerRule::kAdam,
                            .learning_rate = 0.01});
  opt.step(r);
  EXPECT_NEAR(r.value(id)[0], 1.0 - 0.01 * 0.2 / (0.2 + 1e-8), 1e-15);
}

TEST(Optimizer, RejectsInvalidHyperparameters) {
  ParamRegistry<double> r;
  r.add("w", {1});
  EXPECT_THROW(Optimizer<double>(r, {.learning_rate = 0.0}), ConfigError);
  EXPECT_THROW(Optimizer<double>(r, {.learning_rate = 0.1, .l2 = -1}),
               ConfigError);
}

TEST(Optimizer, NonFiniteUpdateIsFatal) {
  ParamRegistry<double> r;
  const ParamId id = r.add("w", {1});
  r.grad(id)[0] = std::numeric_limits<double>::infinity();
  Optimizer<double> opt(r, {.learning_rate = 0.1});
  EXPECT_THROW(opt.step(r), NumericalError);
}

TEST(Optimizer, UnitNormRowsAreProjectedAfterEveryStep) {
  ParamRegistry<double> r;
  const ParamId id = r.add("e", {6, 5}, UpdateRule::kUnitNormRows);
  testing::randomize(r, 4, 3.0);
  Optimizer<double> opt(r, {.learning_rate = 0.5});
  for (int s = 0; s < 3; ++s) {
    testing::randomize(r, 100 + s, 3.0);
    r.grad(id).fill(0.7);
    opt.step(r);
    for (std::size_t row = 0; row < 6; ++row) {
      double sq = 0;
      for (double v : r.value(id).row(row)) sq += v * v;
      EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
  }
}

TEST(GradCheck, LinearLossIsExact) {
  ParamRegistry<double> r;
  const ParamId a = r.add("a", {5});
  const ParamId b = r.add("b", {2, 3});
  testing::randomize(r, 9);
  auto loss = [&] {
    double s = 0;
    for (const auto& p : r) {
      for (double v : p.value.values()) s += v;
    }
    return s;
  };
  auto grad = [&] {
    r.grad(a).fill(1.0);
    r.grad(b).fill(1.0);
  };
  const GradCheckReport report = grad_check(r, loss, grad);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_rel_error, 1e-9);
  EXPECT_EQ(report.checked, 11u);
}

TEST(GradCheck, SamplesCoordinates) {
  ParamRegistry<double> r;
  r.add("a", {50});
  GradCheckOptions opts;
  opts.max_coords_per_param = 7;
  const auto report = grad_check(
      r, [] { return 0.0; }, [] {}, opts);
  EXPECT_EQ(report.checked, 7u);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  ParamRegistry<float> r;
  const ParamId a = r.add("entity.structure", {7, 3});
  r.add("scalar", {1});
  r.add("frozen", {2}, UpdateRule::kFrozen);
  testing::randomize(r, 5, 10.0);
  r.value(a)[4] = -0.0f;
  r.value(a)[5] = 1e-42f;  // subnormal
  const auto dir = testing::temp_dir("ckpt");
  save_checkpoint(dir / "m.ckpt", r, "abc123");
  const Checkpoint ck = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(ck.version, kCheckpointVersion);
  EXPECT_EQ(ck.tag, "abc123");
  ASSERT_EQ(ck.tensors.size(), r.size());
  std::size_t i = 0;
  for (const auto& p : r) {
    const NamedTensor& t = ck.tensors[i++];
    EXPECT_EQ(t.name, p.name);
    EXPECT_EQ(t.value.shape(), p.value.shape());
    EXPECT_EQ(std::memcmp(t.value.data(), p.value.data(),
                          p.value.size() * sizeof(float)),
              0);
  }
  ParamRegistry<float> copy;
  copy.add("entity.structure", {7, 3});
  copy.add("scalar", {2});  // shape mismatch, skipped
  const auto restored = restore_matching(ck, copy);
  ASSERT_EQ(restored.size(), 1u);
  EXPECT_EQ(restored[0], "entity.structure");
  EXPECT_EQ(std::memcmp(copy.value(ParamId{0}).data(), r.value(a).data(),
                        21 * sizeof(float)),
            0);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsForeignFiles) {
  const auto dir = testing::temp_dir("ckpt_bad");
  std::ofstream(dir / "bad.ckpt") << "not a checkpoint";
  EXPECT_THROW(load_checkpoint(dir / "bad.ckpt"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace nkge
