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

#include "spokendial/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace spokendial::numerics {

namespace {

double Evaluate(const std::function<Var<double>()>& loss_fn) {
  const double v = loss_fn().value().item();
  if (!std::isfinite(v)) throw NonFiniteError("GradCheck: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport GradCheck(const std::function<Var<double>()>& loss_fn,
                          const ParameterRefs<double>& params,
                          const GradCheckOptions& options) {
  for (auto* p : params) p->ZeroGrad();
  Var<double> loss = loss_fn();
  if (!std::isfinite(loss.value().item())) {
    throw NonFiniteError("GradCheck: loss is not finite");
  }
  Backward(loss);

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (auto* p : params) {
    const Tensor<double> analytic = p->grad();
    const std::size_t size = p->value().size();
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), 0);
    if (size > options.coordinates_per_parameter) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coordinates_per_parameter);
    }

    ParameterGradError entry;
    entry.name = p->name();
    entry.coordinates_checked = coords.size();
    for (std::size_t c : coords) {
      double& slot = p->mutable_value()[c];
      const double saved = slot;
      slot = saved + options.epsilon;
      const double plus = Evaluate(loss_fn);
      slot = saved - options.epsilon;
      const double minus = Evaluate(loss_fn);
      slot = saved;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[c];
      const double abs_err = std::abs(a - numeric);
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.relative_floor});
      entry.max_absolute_error = std::max(entry.max_absolute_error, abs_err);
      entry.max_relative_error = std::max(entry.max_relative_error, abs_err / denom);
    }
    report.max_relative_error =
        std::max(report.max_relative_error, entry.max_relative_error);
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace spokendial::numerics
