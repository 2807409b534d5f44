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

#include "spokendial/train/optimizer.hpp"

#include <cmath>

namespace spokendial::train {

void AdamWConfig::Validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("AdamW: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("AdamW: epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("AdamW: weight decay must be >= 0");
}

template <typename T>
AdamW<T>::AdamW(numerics::ParameterRefs<T> params, const AdamWConfig& config)
    : params_(std::move(params)), config_(config) {
  config_.Validate();
  for (auto* p : params_) {
    m_.push_back(numerics::Tensor<T>(p->shape()));
    v_.push_back(numerics::Tensor<T>(p->shape()));
  }
}

template <typename T>
void AdamW<T>::Step(double lr) {
  for (auto* p : params_) {
    const auto& g = p->grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(static_cast<double>(g[i]))) throw NonFiniteGradientError(p->name(), i);
    }
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->mutable_value();
    const auto& g = params_[k]->grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = (mi / c1) / (std::sqrt(vi / c2) + config_.epsilon);
      value[i] = static_cast<T>(static_cast<double>(value[i]) * decay - lr * update);
    }
  }
}

template <typename T>
void AdamW<T>::Restore(std::size_t step, std::vector<numerics::Tensor<T>> m,
                       std::vector<numerics::Tensor<T>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw std::invalid_argument("AdamW::Restore: moment count does not match parameters");
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (m[k].shape() != params_[k]->shape() || v[k].shape() != params_[k]->shape()) {
      throw std::invalid_argument("AdamW::Restore: moment shape mismatch for '" +
                                  params_[k]->name() + "'");
    }
  }
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

template <typename T>
double GradientNorm(const numerics::ParameterRefs<T>& params) {
  double sq = 0.0;
  for (auto* p : params) {
    const auto& g = p->grad();
    for (std::size_t i = 0; i < g.size(); ++i) sq += static_cast<double>(g[i]) * g[i];
  }
  return std::sqrt(sq);
}

template <typename T>
double ClipGradientNorm(const numerics::ParameterRefs<T>& params, double max_norm) {
  const double norm = GradientNorm(params);
  if (max_norm > 0.0 && norm > max_norm && std::isfinite(norm)) {
    const double scale = max_norm / norm;
    for (auto* p : params) {
      auto& g = p->mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<T>(g[i] * scale);
    }
  }
  return norm;
}

template class AdamW<float>;
template class AdamW<double>;
template double GradientNorm(const numerics::ParameterRefs<float>&);
template double GradientNorm(const numerics::ParameterRefs<double>&);
template double ClipGradientNorm(const numerics::ParameterRefs<float>&, double);
template double ClipGradientNorm(const numerics::ParameterRefs<double>&, double);

}  // namespace spokendial::train
