/**
 * Copyright 2026 The spokendial Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

// Differentiable ops. Every op takes rank-2 operands and checks shapes
// strictly: the only implicit broadcast is AddRow, which repeats a 1 x n row
// over the leading dimension.
namespace spokendial::numerics {

enum class Padding { kValid, kSame };

struct Conv1dOptions {
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t groups = 1;
  Padding padding = Padding::kValid;
};

// Output length of a 1-D convolution over `length` steps.
std::size_t Conv1dOutputLength(std::size_t length, const Conv1dOptions& opts);

template <typename T>
Var<T> MatMul(const Var<T>& a, const Var<T>& b);
// a * b^T.
template <typename T>
Var<T> MatMulNT(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Transpose(const Var<T>& a);

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Scale(const Var<T>& a, T factor);
// Adds a 1 x n row to every row of an m x n operand.
template <typename T>
Var<T> AddRow(const Var<T>& a, const Var<T>& row);
// Multiplies row r of `a` by the constant factors[r].
template <typename T>
Var<T> ScaleRows(const Var<T>& a, std::span<const T> factors);

template <typename T>
Var<T> Gelu(const Var<T>& a);

// Row-wise softmax. When `key_valid` is non-empty it must have one entry per
// column; zero entries mark invalid columns, which get no probability mass.
template <typename T>
Var<T> SoftmaxRows(const Var<T>& a, std::span<const std::uint8_t> key_valid = {});

// Normalizes each row to zero mean and unit variance (biased), then applies
// gamma and beta (both 1 x n). A constant row normalizes to zero, so its
// output is exactly beta.
template <typename T>
Var<T> LayerNorm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                 T eps = T(1e-5));

// Time-major convolution: x is L x C_in, weight is C_out x (C_in/groups *
// kernel) with index (c_local * kernel + k), bias is 1 x C_out.
template <typename T>
Var<T> Conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const Conv1dOptions& opts);

// Selects rows of `table` by index; repeated indices accumulate gradient.
// This is the embedding lookup.
template <typename T>
Var<T> GatherRows(const Var<T>& table, std::span<const std::size_t> indices);

template <typename T>
Var<T> ConcatRows(std::span<const Var<T>> parts);
template <typename T>
Var<T> ConcatCols(std::span<const Var<T>> parts);
template <typename T>
Var<T> SliceRows(const Var<T>& a, std::size_t begin, std::size_t end);
template <typename T>
Var<T> SliceCols(const Var<T>& a, std::size_t begin, std::size_t end);

template <typename T>
Var<T> Sum(const Var<T>& a);
template <typename T>
Var<T> Mean(const Var<T>& a);

// Mean over rows of -log softmax(logits)[target].
template <typename T>
Var<T> CrossEntropy(const Var<T>& logits, std::span<const std::size_t> targets);
template <typename T>
Var<T> MeanSquaredError(const Var<T>& prediction, const Var<T>& target);
template <typename T>
Var<T> MeanAbsoluteError(const Var<T>& prediction, const Var<T>& target);

// Same value, no gradient path.
template <typename T>
Var<T> Detach(const Var<T>& a);

// Inverted dropout. p == 0 returns the input unchanged.
template <typename T>
Var<T> Dropout(const Var<T>& a, double p, std::mt19937_64& rng);

template <typename T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) {
  return Add(a, b);
}
template <typename T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) {
  return Sub(a, b);
}

}  // namespace spokendial::numerics
