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

#ifndef NKGE_KERNELS_H_
#define NKGE_KERNELS_H_

// Dense vector/matrix primitives with forward and backward passes.
//
// Matrices are row-major spans; the row count is implied by the output (for
// forward) or upstream (for backward) span length. Every backward function
// accumulates (+=) into its gradient outputs and never overwrites them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include <Eigen/Core>
#include <string>

#include "nkge/errors.h"

namespace nkge::ops {

inline void check_size(std::size_t got, std::size_t want, const char* op) {
  if (got != want) {
    throw NumericalError(std::string(op) + ": shape mismatch (" +
                         std::to_string(got) + " vs " + std::to_string(want) +
                         ")");
  }
}

template <typename T>
void check_finite(std::span<const T> x, const char* op) {
  // v * 0 is NaN exactly when v is infinite or NaN.
  T acc{0};
  const T* p = x.data();
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < x.size(); ++i) acc += p[i] * T{0};
  if (!(acc == T{0})) {
    throw NumericalError(std::string(op) + ": non-finite output");
  }
}

template <typename T>
void check_finite(T x, const char* op) {
  if (!std::isfinite(x)) {
    throw NumericalError(std::string(op) + ": non-finite output");
  }
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  check_size(a.size(), b.size(), "dot");
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(a.size());
  return Eigen::Map<const Vec>(a.data(), n).dot(Eigen::Map<const Vec>(b.data(), n));
}

// y += alpha * x
template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  check_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// y = W x, W is y.size() x x.size().
template <typename T>
void matvec(std::span<const T> w, std::span<const T> x, std::span<T> y) {
  const std::size_t cols = x.size();
  check_size(w.size(), y.size() * cols, "matvec");
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const auto rows = static_cast<Eigen::Index>(y.size());
  const auto n = static_cast<Eigen::Index>(cols);
  Eigen::Map<Vec>(y.data(), rows).noalias() =
      Eigen::Map<const Mat>(w.data(), rows, n) * Eigen::Map<const Vec>(x.data(), n);
  check_finite<T>(y, "matvec");
}

// dW += dy x^T, dx += W^T dy. Either gradient span may be empty to skip it.
template <typename T>
void matvec_backward(std::span<const T> w, std::span<const T> x,
                     std::span<const T> dy, std::span<T> dw,
                     std::span<T> dx) {
  const std::size_t cols = x.size();
  check_size(w.size(), dy.size() * cols, "matvec_backward");
  if (!dw.empty()) {
    check_size(dw.size(), w.size(), "matvec_backward");
    for (std::size_t r = 0; r < dy.size(); ++r) {
      const T g = dy[r];
      if (g == T{0}) continue;
      T* dwr = dw.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dwr[c] += g * x[c];
    }
  }
  if (!dx.empty()) {
    check_size(dx.size(), cols, "matvec_backward");
    for (std::size_t r = 0; r < dy.size(); ++r) {
      const T g = dy[r];
      if (g == T{0}) continue;
      const T* wr = w.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dx[c] += g * wr[c];
    }
  }
}

// out = [a; b]
template <typename T>
void concat(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  check_size(out.size(), a.size() + b.size(), "concat");
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + a.size());
}

template <typename T>
void concat_backward(std::span<const T> dout, std::span<T> da,
                     std::span<T> db) {
  check_size(dout.size(), da.size() + db.size(), "concat_backward");
  for (std::size_t i = 0; i < da.size(); ++i) da[i] += dout[i];
  for (std::size_t i = 0; i < db.size(); ++i) db[i] += dout[da.size() + i];
}

template <typename T>
void relu(std::span<const T> x, std::span<T> y) {
  check_size(y.size(), x.size(), "relu");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
}

// Subgradient at exactly 0 is 0.
template <typename T>
void relu_backward(std::span<const T> x, std::span<const T> dy,
                   std::span<T> dx) {
  check_size(dy.size(), x.size(), "relu_backward");
  check_size(dx.size(), x.size(), "relu_backward");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > T{0}) dx[i] += dy[i];
  }
}

template <typename T>
void tanh_forward(std::span<const T> x, std::span<T> y) {
  check_size(y.size(), x.size(), "tanh");
  using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::Map<Arr>(y.data(), n) = Eigen::Map<const Arr>(x.data(), n).tanh();
  check_finite<T>(y, "tanh");
}

// Uses the forward output y.
template <typename T>
void tanh_backward(std::span<const T> y, std::span<const T> dy,
                   std::span<T> dx) {
  check_size(dy.size(), y.size(), "tanh_backward");
  check_size(dx.size(), y.size(), "tanh_backward");
  for (std::size_t i = 0; i < y.size(); ++i) {
    dx[i] += dy[i] * (T{1} - y[i] * y[i]);
  }
}

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y) {
  check_size(y.size(), x.size(), "sigmoid");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  check_finite<T>(y, "sigmoid");
}

template <typename T>
void sigmoid_backward(std::span<const T> y, std::span<const T> dy,
                      std::span<T> dx) {
  check_size(dy.size(), y.size(), "sigmoid_backward");
  check_size(dx.size(), y.size(), "sigmoid_backward");
  for (std::size_t i = 0; i < y.size(); ++i) {
    dx[i] += dy[i] * y[i] * (T{1} - y[i]);
  }
}

template <typename T>
void softmax(std::span<const T> x, std::span<T> y) {
  check_size(y.size(), x.size(), "softmax");
  if (x.empty()) return;
  T mx = x[0];
  for (const T v : x) mx = v > mx ? v : mx;
  T sum{0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] /= sum;
  check_finite<T>(y, "softmax");
}

// Full Jacobian-vector product: dx_i += y_i (dy_i - sum_j y_j dy_j).
template <typename T>
void softmax_backward(std::span<const T> y, std::span<const T> dy,
                      std::span<T> dx) {
  check_size(dy.size(), y.size(), "softmax_backward");
  check_size(dx.size(), y.size(), "softmax_backward");
  T inner{0};
  for (std::size_t i = 0; i < y.size(); ++i) inner += y[i] * dy[i];
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] += y[i] * (dy[i] - inner);
}

template <typename T>
void add(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  check_size(b.size(), a.size(), "add");
  check_size(out.size(), a.size(), "add");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  check_finite<T>(out, "add");
}

template <typename T>
void add_backward(std::span<const T> dout, std::span<T> da, std::span<T> db) {
  check_size(da.size(), dout.size(), "add_backward");
  check_size(db.size(), dout.size(), "add_backward");
  for (std::size_t i = 0; i < dout.size(); ++i) {
    da[i] += dout[i];
    db[i] += dout[i];
  }
}

template <typename T>
void sub(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  check_size(b.size(), a.size(), "sub");
  check_size(out.size(), a.size(), "sub");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  check_finite<T>(out, "sub");
}

template <typename T>
void sub_backward(std::span<const T> dout, std::span<T> da, std::span<T> db) {
  check_size(da.size(), dout.size(), "sub_backward");
  check_size(db.size(), dout.size(), "sub_backward");
  for (std::size_t i = 0; i < dout.size(); ++i) {
    da[i] += dout[i];
    db[i] -= dout[i];
  }
}

template <typename T>
void mul(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  check_size(b.size(), a.size(), "mul");
  check_size(out.size(), a.size(), "mul");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  check_finite<T>(out, "mul");
}

template <typename T>
void mul_backward(std::span<const T> a, std::span<const T> b,
                  std::span<const T> dout, std::span<T> da, std::span<T> db) {
  check_size(dout.size(), a.size(), "mul_backward");
  for (std::size_t i = 0; i < dout.size(); ++i) {
    if (!da.empty()) da[i] += dout[i] * b[i];
    if (!db.empty()) db[i] += dout[i] * a[i];
  }
}

// sum_i |a_i - b_i|
template <typename T>
T l1_distance(std::span<const T> a, std::span<const T> b) {
  check_size(b.size(), a.size(), "l1_distance");
  T sum{0};
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  check_finite(sum, "l1_distance");
  return sum;
}

// sign(0) = 0.
template <typename T>
void l1_distance_backward(std::span<const T> a, std::span<const T> b,
                          T dout, std::span<T> da, std::span<T> db) {
  check_size(b.size(), a.size(), "l1_distance_backward");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T diff = a[i] - b[i];
    const T s = diff > T{0} ? T{1} : (diff < T{0} ? T{-1} : T{0});
    if (!da.empty()) da[i] += dout * s;
    if (!db.empty()) db[i] -= dout * s;
  }
}

// sum_i (a_i - b_i)^2
template <typename T>
T sq_l2_distance(std::span<const T> a, std::span<const T> b) {
  check_size(b.size(), a.size(), "sq_l2_distance");
  T sum{0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T diff = a[i] - b[i];
    sum += diff * diff;
  }
  check_finite(sum, "sq_l2_distance");
  return sum;
}

template <typename T>
void sq_l2_distance_backward(std::span<const T> a, std::span<const T> b,
                             T dout, std::span<T> da, std::span<T> db) {
  check_size(b.size(), a.size(), "sq_l2_distance_backward");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T g = T{2} * dout * (a[i] - b[i]);
    if (!da.empty()) da[i] += g;
    if (!db.empty()) db[i] -= g;
  }
}

}  // namespace nkge::ops

#endif  // NKGE_KERNELS_H_
