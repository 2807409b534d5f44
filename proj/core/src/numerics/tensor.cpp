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

#include "spokendial/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spokendial::numerics {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t ShapeElementCount(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

void ThrowShapeMismatch(std::string_view op, const Shape& a, const Shape& b) {
  std::ostringstream os;
  os << op << ": shape mismatch between " << ShapeToString(a) << " and "
     << ShapeToString(b);
  throw ShapeError(os.str());
}

template <typename T>
Tensor<T>::Tensor(Shape shape)
    : shape_(std::move(shape)), values_(ShapeElementCount(shape_), T(0)) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != ShapeElementCount(shape_)) {
    std::ostringstream os;
    os << "Tensor: shape " << ShapeToString(shape_) << " holds "
       << ShapeElementCount(shape_) << " elements but " << values_.size()
       << " values were given";
    throw ShapeError(os.str());
  }
}

template <typename T>
Tensor<T> Tensor<T>::Full(std::size_t rows, std::size_t cols, T value) {
  Tensor t(Shape{rows, cols});
  t.Fill(value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::Identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = T(1);
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  if (values_.size() != 1) {
    throw ShapeError("item(): expected a single element, got shape " +
                     ShapeToString(shape_));
  }
  return values_[0];
}

template <typename T>
void Tensor<T>::Fill(T value) {
  std::fill(values_.begin(), values_.end(), value);
}

template <typename T>
bool Tensor<T>::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace spokendial::numerics
