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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spokendial/model/model.hpp"
#include "spokendial/numerics/autograd.hpp"

namespace spokendial::finetune {

enum class TaskKind { kRegression, kClassification };

// Regression uses squared error and binary accuracy (sign agreement);
// classification uses cross-entropy and argmax accuracy.
struct TaskSpec {
  TaskKind kind = TaskKind::kClassification;
  std::size_t output_dim = 2;

  static TaskSpec Regression() { return {TaskKind::kRegression, 1}; }
  static TaskSpec Classification(std::size_t classes) {
    return {TaskKind::kClassification, classes};
  }

  // Throws std::invalid_argument unless regression has output_dim 1 and
  // classification has at least 2 classes.
  void Validate() const;
  std::string metric_name() const;
  std::string loss_name() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

void to_json(nlohmann::json& j, const TaskSpec& t);
void from_json(const nlohmann::json& j, TaskSpec& t);

// W2 GELU(W1 h + b1) + b2 on one hidden state.
template <typename T>
class PredictionHead {
 public:
  PredictionHead(std::size_t hidden, std::size_t output_dim, std::mt19937_64& rng,
                 const std::string& prefix = "finetune.head");

  std::size_t hidden() const { return w1_.value().rows(); }
  std::size_t output_dim() const { return w2_.value().cols(); }

  // `state` is 1 x d_h; returns 1 x d_o.
  numerics::Var<T> Forward(const numerics::Var<T>& state) const;

  numerics::Parameter<T>& w1() { return w1_; }
  numerics::Parameter<T>& b1() { return b1_; }
  numerics::Parameter<T>& w2() { return w2_; }
  numerics::Parameter<T>& b2() { return b2_; }
  numerics::ParameterRefs<T> Parameters() { return {&w1_, &b1_, &w2_, &b2_}; }

 private:
  numerics::Parameter<T> w1_, b1_, w2_, b2_;
};

// The head applied to row 0 (<s>) of the fused sequence. Throws
// std::invalid_argument when the head's output size disagrees with `task`.
template <typename T>
numerics::Var<T> Predict(const numerics::Var<T>& fused_hidden, const PredictionHead<T>& head,
                         const TaskSpec& task);

// Squared error for regression (label is the target value) or cross-entropy
// for classification (label is the class index).
template <typename T>
numerics::Var<T> TaskLoss(const numerics::Var<T>& prediction, double label, const TaskSpec& task);

// Accuracy over rows of `outputs` (one row per example). Regression counts
// sign agreement with the label, thresholding both at 0; classification
// counts argmax hits. Throws std::invalid_argument on an empty set or a
// size mismatch.
double Accuracy(const TaskSpec& task, std::span<const std::vector<double>> outputs,
                std::span<const double> labels);

// Encoder plus prediction head.
template <typename T>
struct FinetuneModel {
  FinetuneModel(const model::ModelConfig& config, const TaskSpec& task, std::uint64_t seed);

  TaskSpec task;
  model::SpeechTextModel<T> encoder;
  std::mt19937_64 head_rng;
  PredictionHead<T> head;

  numerics::ParameterRefs<T> Parameters();
};

extern template class PredictionHead<float>;
extern template class PredictionHead<double>;
extern template struct FinetuneModel<float>;
extern template struct FinetuneModel<double>;

}  // namespace spokendial::finetune
