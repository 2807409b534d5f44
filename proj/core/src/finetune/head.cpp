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

#include "spokendial/finetune/head.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::finetune {

using numerics::Tensor;
using numerics::Var;

void TaskSpec::Validate() const {
  if (kind == TaskKind::kRegression && output_dim != 1) {
    throw std::invalid_argument("TaskSpec: regression needs output size 1, got " +
                                std::to_string(output_dim));
  }
  if (kind == TaskKind::kClassification && output_dim < 2) {
    throw std::invalid_argument("TaskSpec: classification needs at least 2 classes");
  }
}

std::string TaskSpec::metric_name() const {
  return kind == TaskKind::kRegression ? "binary_accuracy" : "accuracy";
}

std::string TaskSpec::loss_name() const {
  return kind == TaskKind::kRegression ? "squared_error" : "cross_entropy";
}

void to_json(nlohmann::json& j, const TaskSpec& t) {
  j = {{"kind", t.kind == TaskKind::kRegression ? "regression" : "classification"},
       {"output_dim", t.output_dim}};
}

void from_json(const nlohmann::json& j, TaskSpec& t) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "regression") {
    t.kind = TaskKind::kRegression;
  } else if (kind == "classification") {
    t.kind = TaskKind::kClassification;
  } else {
    throw std::invalid_argument("TaskSpec: unknown kind '" + kind + "'");
  }
  t.output_dim = j.at("output_dim").get<std::size_t>();
  t.Validate();
}

template <typename T>
PredictionHead<T>::PredictionHead(std::size_t hidden, std::size_t output_dim,
                                  std::mt19937_64& rng, const std::string& prefix)
    : w1_(prefix + ".w1", numerics::XavierUniform<T>(hidden, hidden, rng)),
      b1_(prefix + ".b1", Tensor<T>::Zeros(1, hidden)),
      w2_(prefix + ".w2", numerics::XavierUniform<T>(hidden, output_dim, rng)),
      b2_(prefix + ".b2", Tensor<T>::Zeros(1, output_dim)) {
  if (hidden == 0 || output_dim == 0) {
    throw std::invalid_argument("PredictionHead: sizes must be positive");
  }
}

template <typename T>
Var<T> PredictionHead<T>::Forward(const Var<T>& state) const {
  auto h = numerics::Gelu(numerics::AddRow(numerics::MatMul(state, w1_.var()), b1_.var()));
  return numerics::AddRow(numerics::MatMul(h, w2_.var()), b2_.var());
}

template <typename T>
Var<T> Predict(const Var<T>& fused_hidden, const PredictionHead<T>& head, const TaskSpec& task) {
  task.Validate();
  if (head.output_dim() != task.output_dim) {
    throw std::invalid_argument("Predict: head has " + std::to_string(head.output_dim()) +
                                " outputs but the task expects " +
                                std::to_string(task.output_dim));
  }
  if (fused_hidden.rows() == 0) throw std::invalid_argument("Predict: empty fused sequence");
  return head.Forward(numerics::SliceRows(fused_hidden, 0, 1));
}

template <typename T>
Var<T> TaskLoss(const Var<T>& prediction, double label, const TaskSpec& task) {
  if (task.kind == TaskKind::kRegression) {
    Tensor<T> target({1, 1});
    target[0] = static_cast<T>(label);
    // MeanSquaredError on a single entry is the squared error.
    return numerics::MeanSquaredError(prediction, Var<T>::Constant(std::move(target)));
  }
  if (label < 0 || label != std::floor(label) ||
      label >= static_cast<double>(task.output_dim)) {
    throw std::invalid_argument("TaskLoss: class label " + std::to_string(label) +
                                " outside [0, " + std::to_string(task.output_dim) + ")");
  }
  const std::size_t cls = static_cast<std::size_t>(label);
  return numerics::CrossEntropy(prediction, std::span<const std::size_t>(&cls, 1));
}

double Accuracy(const TaskSpec& task, std::span<const std::vector<double>> outputs,
                std::span<const double> labels) {
  if (outputs.empty()) throw std::invalid_argument("Accuracy: empty dataset");
  if (outputs.size() != labels.size()) {
    throw std::invalid_argument("Accuracy: " + std::to_string(outputs.size()) +
                                " outputs for " + std::to_string(labels.size()) + " labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    if (o.size() != task.output_dim) {
      throw std::invalid_argument("Accuracy: output " + std::to_string(i) + " has size " +
                                  std::to_string(o.size()));
    }
    if (task.kind == TaskKind::kRegression) {
      hits += (o[0] > 0.0) == (labels[i] > 0.0);
    } else {
      const auto best = static_cast<double>(std::max_element(o.begin(), o.end()) - o.begin());
      hits += best == labels[i];
    }
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

template <typename T>
FinetuneModel<T>::FinetuneModel(const model::ModelConfig& config, const TaskSpec& task_spec,
                                std::uint64_t seed)
    : task(task_spec),
      encoder(config, seed),
      head_rng(seed ^ 0x9e3779b97f4a7c15ULL),
      head(config.hidden(), task_spec.output_dim, head_rng) {
  task.Validate();
}

template <typename T>
numerics::ParameterRefs<T> FinetuneModel<T>::Parameters() {
  auto out = encoder.Parameters();
  auto h = head.Parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

template class PredictionHead<float>;
template class PredictionHead<double>;
template struct FinetuneModel<float>;
template struct FinetuneModel<double>;
template Var<float> Predict(const Var<float>&, const PredictionHead<float>&, const TaskSpec&);
template Var<double> Predict(const Var<double>&, const PredictionHead<double>&, const TaskSpec&);
template Var<float> TaskLoss(const Var<float>&, double, const TaskSpec&);
template Var<double> TaskLoss(const Var<double>&, double, const TaskSpec&);

}  // namespace spokendial::finetune
