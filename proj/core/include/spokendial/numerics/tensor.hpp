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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spokendial::numerics {

using Shape = std::vector<std::size_t>;

std::string ShapeToString(const Shape& shape);
std::size_t ShapeElementCount(const Shape& shape);

// Raised by any op whose operand shapes are incompatible. The message names
// the op and both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an op produces NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void ThrowShapeMismatch(std::string_view op, const Shape& a,
                                     const Shape& b);

// Dense row-major tensor. Almost every op in this library works on rank-2
// tensors; vectors are represented as 1 x n rows.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<T> values);

  static Tensor Zeros(std::size_t rows, std::size_t cols) {
    return Tensor(Shape{rows, cols});
  }
  static Tensor Full(std::size_t rows, std::size_t cols, T value);
  static Tensor Scalar(T value) { return Full(1, 1, value); }
  static Tensor Identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }
  const T* data() const { return values_.data(); }
  T* data() { return values_.data(); }

  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }

  // The scalar held by a 1 x 1 tensor.
  T item() const;

  void Fill(T value);
  bool AllFinite() const;

  template <typename U>
  Tensor<U> Cast() const {
    std::vector<U> out(values_.begin(), values_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Shape shape_;
  std::vector<T> values_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace spokendial::numerics
