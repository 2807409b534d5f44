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

#include <cmath>
#include <random>

#include "spokendial/numerics/tensor.hpp"

namespace spokendial::numerics {

template <typename T>
Tensor<T> RandomNormal(std::size_t rows, std::size_t cols, double stddev,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor<T> t = Tensor<T>::Zeros(rows, cols);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
Tensor<T> RandomUniform(std::size_t rows, std::size_t cols, double lo, double hi,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<T> t = Tensor<T>::Zeros(rows, cols);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

// Glorot-uniform for a fan_in x fan_out weight.
template <typename T>
Tensor<T> XavierUniform(std::size_t fan_in, std::size_t fan_out,
                        std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return RandomUniform<T>(fan_in, fan_out, -bound, bound, rng);
}

}  // namespace spokendial::numerics
