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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::numerics {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Parameters with more coordinates than this are sampled without
  // replacement; smaller ones are checked exhaustively.
  std::size_t coordinates_per_parameter = 100;
  // Denominator floor of the relative error, so coordinates whose true
  // gradient is ~0 are judged by absolute error instead.
  double relative_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct ParameterGradError {
  std::string name;
  std::size_t coordinates_checked = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<ParameterGradError> per_param;
};

// Compares reverse-mode gradients of `loss_fn` against central differences
// (f(p + eps) - f(p - eps)) / (2 eps). Only 64-bit parameters are accepted.
// `loss_fn` must be deterministic; parameter values are restored afterwards.
// Throws NonFiniteError if any evaluated loss is not finite.
GradCheckReport GradCheck(const std::function<Var<double>()>& loss_fn,
                          const ParameterRefs<double>& params,
                          const GradCheckOptions& options = {});

}  // namespace spokendial::numerics
