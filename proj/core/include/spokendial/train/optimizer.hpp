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
#include <stdexcept>
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::train {

class NonFiniteGradientError : public std::runtime_error {
 public:
  NonFiniteGradientError(const std::string& parameter, std::size_t index)
      : std::runtime_error("non-finite gradient in parameter '" + parameter + "' at index " +
                           std::to_string(index)),
        parameter_(parameter) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  void Validate() const;
};

// Adam with decoupled weight decay:
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// with bias-corrected moments m_hat, v_hat. Decay applies to every parameter.
template <typename T>
class AdamW {
 public:
  AdamW(numerics::ParameterRefs<T> params, const AdamWConfig& config);

  // Scans all gradients first; on a non-finite entry throws
  // NonFiniteGradientError and leaves parameters and moments untouched.
  void Step(double lr);

  const AdamWConfig& config() const { return config_; }
  std::size_t step_count() const { return step_; }
  const numerics::ParameterRefs<T>& parameters() const { return params_; }
  const std::vector<numerics::Tensor<T>>& first_moments() const { return m_; }
  const std::vector<numerics::Tensor<T>>& second_moments() const { return v_; }

  // Restores optimizer state; moments must match the parameter shapes.
  void Restore(std::size_t step, std::vector<numerics::Tensor<T>> m,
               std::vector<numerics::Tensor<T>> v);

 private:
  numerics::ParameterRefs<T> params_;
  AdamWConfig config_;
  std::size_t step_ = 0;
  std::vector<numerics::Tensor<T>> m_, v_;
};

// Global L2 norm of all gradients.
template <typename T>
double GradientNorm(const numerics::ParameterRefs<T>& params);

// Rescales gradients so the global norm is at most `max_norm` and returns
// the norm before clipping. max_norm <= 0 disables clipping.
template <typename T>
double ClipGradientNorm(const numerics::ParameterRefs<T>& params, double max_norm);

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace spokendial::train
