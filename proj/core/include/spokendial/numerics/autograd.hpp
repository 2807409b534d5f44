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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spokendial/numerics/tensor.hpp"

namespace spokendial::numerics {

template <typename T>
struct Node {
  Tensor<T> value;
  // Empty until the first gradient is accumulated.
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Propagates this->grad into inputs[*]. Null for leaves and constants.
  std::function<void(Node&)> backward_fn;

  Tensor<T>& GradBuffer();
  void Accumulate(const Tensor<T>& g);
};

// Handle to a value in the computation graph. Cheap to copy; copies share the
// underlying node. Values are immutable once produced by an op.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var Constant(Tensor<T> value);

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  // Zero tensor of the value's shape when no gradient reached this node.
  Tensor<T> grad() const;
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// A named learnable leaf. The gradient always has the value's shape and is
// zero after ZeroGrad(). Parameters own their node, so they are move-only.
template <typename T>
class Parameter {
 public:
  Parameter(std::string name, Tensor<T> init);
  Parameter(const Parameter&) = delete;
  Parameter& operator=(const Parameter&) = delete;
  Parameter(Parameter&&) noexcept = default;
  Parameter& operator=(Parameter&&) noexcept = default;

  const std::string& name() const { return name_; }
  const Tensor<T>& value() const { return node_->value; }
  // In-place access for optimizers and checkpoint restore. The shape must
  // not change.
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->GradBuffer(); }
  Tensor<T>& mutable_grad() { return node_->GradBuffer(); }
  void ZeroGrad();
  Var<T> var() const { return Var<T>(node_); }
  const Shape& shape() const { return node_->value.shape(); }

 private:
  std::string name_;
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
using ParameterRefs = std::vector<Parameter<T>*>;

// Builds the result node of an op. The backward closure is kept only when at
// least one input requires a gradient.
template <typename T>
Var<T> MakeResult(std::string_view op, Tensor<T> value,
                  std::vector<Var<T>> inputs,
                  std::function<void(Node<T>&)> backward_fn);

// Reverse-mode sweep from a 1 x 1 loss. Gradients accumulate into every
// reachable node that requires one, including parameters.
template <typename T>
void Backward(const Var<T>& loss, T seed = T(1));

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Var<float>;
extern template class Var<double>;
extern template class Parameter<float>;
extern template class Parameter<double>;

}  // namespace spokendial::numerics
