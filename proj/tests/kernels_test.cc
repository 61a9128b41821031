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

#include "nkge/kernels.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "nkge/errors.h"
#include "test_util.h"

namespace nkge {
namespace {

using testing::check_kernel;
using testing::KernelCase;
using Spans = std::vector<std::span<const double>>;
using Grads = std::vector<std::span<double>>;

std::mt19937_64& rng() {
  static std::mt19937_64 r(3);
  return r;
}

std::vector<double> away_from_zero(std::size_t n) {
  auto v = testing::random_vector(n, rng(), 0.1, 1.0);
  for (std::size_t i = 0; i < n; i += 2) v[i] = -v[i];
  return v;
}

TEST(Kernels, SoftmaxOfEqualLogitsIsUniform) {
  for (std::size_t k : {1u, 4u, 20u}) {
    std::vector<double> x(k, 0.37), y(k);
    ops::softmax<double>(x, y);
    for (double v : y) EXPECT_DOUBLE_EQ(v, 1.0 / double(k));
  }
}

TEST(Kernels, SigmoidAndTanhAtZero) {
  EXPECT_EQ(ops::sigmoid(0.0), 0.5);
  std::vector<double> x{0.0}, y(1);
  ops::tanh_forward<double>(x, y);
  EXPECT_EQ(y[0], 0.0);
}

TEST(Kernels, SigmoidIsStableForLargeInputs) {
  EXPECT_EQ(ops::sigmoid(1e4), 1.0);
  EXPECT_EQ(ops::sigmoid(-1e4), 0.0);
  EXPECT_TRUE(std::isfinite(ops::sigmoid(-800.0)));
}

TEST(Kernels, SoftmaxIsADistribution) {
  for (int trial = 0; trial < 50; ++trial) {
    auto x = testing::random_vector(17, rng(), -30, 30);
    std::vector<double> y(x.size());
    ops::softmax<double>(x, y);
    double sum = 0;
    for (double v : y) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Kernels, ShapeMismatchIsFatal) {
  std::vector<double> a(3), b(4), out(3);
  EXPECT_THROW(ops::add<double>(a, b, out), NumericalError);
  EXPECT_THROW(ops::matvec<double>(a, b, out), NumericalError);
}

TEST(Kernels, NonFiniteOutputNamesTheOp) {
  std::vector<double> w{std::numeric_limits<double>::infinity()}, x{1}, y(1);
  try {
    ops::matvec<double>(w, x, y);
    FAIL() << "expected a NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("matvec"), std::string::npos);
  }
  std::vector<float> nan{1.0f, std::nanf("")};
  EXPECT_THROW(ops::check_finite<float>(nan, "probe"), NumericalError);
  std::vector<float> ok{1.0f, -2.0f, 0.0f};
  EXPECT_NO_THROW(ops::check_finite<float>(ok, "probe"));
}

TEST(Kernels, ReluSubgradientAtZeroIsZero) {
  std::vector<double> x{0.0, 1.0, -1.0}, dy{1.0, 1.0, 1.0}, dx(3, 0.0);
  ops::relu_backward<double>(x, dy, dx);
  EXPECT_EQ(dx[0], 0.0);
  EXPECT_EQ(dx[1], 1.0);
  EXPECT_EQ(dx[2], 0.0);
}

TEST(Kernels, BackwardAccumulates) {
  std::vector<double> a{1, -2}, b{3, 4}, dout{1, 1}, da(2, 0.0), db(2, 0.0);
  ops::mul_backward<double>(a, b, dout, da, db);
  ops::mul_backward<double>(a, b, dout, da, db);
  EXPECT_EQ(da[0], 6.0);
  EXPECT_EQ(db[1], -4.0);
}

TEST(KernelGradients, Matvec) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(12, rng()),
               testing::random_vector(4, rng())};
  kc.out_size = 3;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::matvec<double>(in[0], in[1], out);
  };
  kc.backward = [](const Spans& in, std::span<const double>,
                   std::span<const double> dout, const Grads& g) {
    ops::matvec_backward<double>(in[0], in[1], dout, g[0], g[1]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, Concat) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(3, rng()),
               testing::random_vector(5, rng())};
  kc.out_size = 8;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::concat<double>(in[0], in[1], out);
  };
  kc.backward = [](const Spans&, std::span<const double>,
                   std::span<const double> dout, const Grads& g) {
    ops::concat_backward<double>(dout, g[0], g[1]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, Relu) {
  KernelCase kc;
  kc.inputs = {away_from_zero(9)};
  kc.out_size = 9;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::relu<double>(in[0], out);
  };
  kc.backward = [](const Spans& in, std::span<const double>,
                   std::span<const double> dout, const Grads& g) {
    ops::relu_backward<double>(in[0], dout, g[0]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, Tanh) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(7, rng(), -2, 2)};
  kc.out_size = 7;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::tanh_forward<double>(in[0], out);
  };
  kc.backward = [](const Spans&, std::span<const double> out,
                   std::span<const double> dout, const Grads& g) {
    ops::tanh_backward<double>(out, dout, g[0]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, Sigmoid) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(7, rng(), -4, 4)};
  kc.out_size = 7;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::sigmoid<double>(in[0], out);
  };
  kc.backward = [](const Spans&, std::span<const double> out,
                   std::span<const double> dout, const Grads& g) {
    ops::sigmoid_backward<double>(out, dout, g[0]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, Softmax) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(6, rng(), -3, 3)};
  kc.out_size = 6;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::softmax<double>(in[0], out);
  };
  kc.backward = [](const Spans&, std::span<const double> out,
                   std::span<const double> dout, const Grads& g) {
    ops::softmax_backward<double>(out, dout, g[0]);
  };
  EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6);
}

TEST(KernelGradients, ElementwiseOps) {
  for (int op = 0; op < 3; ++op) {
    KernelCase kc;
    kc.inputs = {testing::random_vector(5, rng()),
                 testing::random_vector(5, rng())};
    kc.out_size = 5;
    kc.forward = [op](const Spans& in, std::span<double> out) {
      if (op == 0) ops::add<double>(in[0], in[1], out);
      if (op == 1) ops::sub<double>(in[0], in[1], out);
      if (op == 2) ops::mul<double>(in[0], in[1], out);
    };
    kc.backward = [op](const Spans& in, std::span<const double>,
                       std::span<const double> dout, const Grads& g) {
      if (op == 0) ops::add_backward<double>(dout, g[0], g[1]);
      if (op == 1) ops::sub_backward<double>(dout, g[0], g[1]);
      if (op == 2) ops::mul_backward<double>(in[0], in[1], dout, g[0], g[1]);
    };
    EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6) << "op " << op;
  }
}

TEST(KernelGradients, Distances) {
  for (int op = 0; op < 2; ++op) {
    KernelCase kc;
    auto a = testing::random_vector(6, rng());
    auto b = a;
    const auto gap = away_from_zero(6);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += gap[i];
    kc.inputs = {a, b};
    kc.out_size = 1;
    kc.forward = [op](const Spans& in, std::span<double> out) {
      out[0] = op == 0 ? ops::l1_distance<double>(in[0], in[1])
                       : ops::sq_l2_distance<double>(in[0], in[1]);
    };
    kc.backward = [op](const Spans& in, std::span<const double>,
                       std::span<const double> dout, const Grads& g) {
      if (op == 0) {
        ops::l1_distance_backward<double>(in[0], in[1], dout[0], g[0], g[1]);
      } else {
        ops::sq_l2_distance_backward<double>(in[0], in[1], dout[0], g[0],
                                             g[1]);
      }
    };
    EXPECT_LT(check_kernel(kc).max_rel_error, 1e-6) << "op " << op;
  }
}

TEST(KernelGradients, CorruptedBackwardIsCaught) {
  KernelCase kc;
  kc.inputs = {testing::random_vector(6, rng(), -2, 2)};
  kc.out_size = 6;
  kc.forward = [](const Spans& in, std::span<double> out) {
    ops::tanh_forward<double>(in[0], out);
  };
  kc.backward = [](const Spans&, std::span<const double> out,
                   std::span<const double> dout, const Grads& g) {
    ops::tanh_backward<double>(out, dout, g[0]);
    g[0][2] += 0.1;
  };
  const GradCheckReport report = check_kernel(kc);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.max_rel_error, 1e-3);
  EXPECT_EQ(report.worst_index, 2u);
}

}  // namespace
}  // namespace nkge
