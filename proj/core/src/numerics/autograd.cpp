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

#include "spokendial/numerics/autograd.hpp"

#include <unordered_set>
#include <utility>

namespace spokendial::numerics {

template <typename T>
Tensor<T>& Node<T>::GradBuffer() {
  if (grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
  return grad;
}

template <typename T>
void Node<T>::Accumulate(const Tensor<T>& g) {
  if (g.shape() != value.shape()) {
    ThrowShapeMismatch("gradient accumulation", value.shape(), g.shape());
  }
  auto& buf = GradBuffer();
  auto dst = buf.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
Var<T> Var<T>::Constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return Var(std::move(node));
}

template <typename T>
Tensor<T> Var<T>::grad() const {
  if (node_->grad.shape() == node_->value.shape()) return node_->grad;
  return Tensor<T>(node_->value.shape());
}

template <typename T>
Parameter<T>::Parameter(std::string name, Tensor<T> init)
    : name_(std::move(name)), node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(init);
  node_->requires_grad = true;
  node_->GradBuffer();
}

template <typename T>
void Parameter<T>::ZeroGrad() {
  node_->GradBuffer().Fill(T(0));
}

template <typename T>
Var<T> MakeResult(std::string_view op, Tensor<T> value,
                  std::vector<Var<T>> inputs,
                  std::function<void(Node<T>&)> backward_fn) {
  if (!value.AllFinite()) {
    throw NonFiniteError(std::string(op) + ": produced a non-finite value");
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Var<T>(std::move(node));
}

template <typename T>
void Backward(const Var<T>& loss, T seed) {
  if (loss.value().size() != 1) {
    throw ShapeError("Backward: loss must be a single element, got " +
                     ShapeToString(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->Accumulate(Tensor<T>::Scalar(seed));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn && node->grad.shape() == node->value.shape()) {
      node->backward_fn(*node);
    }
  }
}

template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template class Parameter<float>;
template class Parameter<double>;

template Var<float> MakeResult(std::string_view, Tensor<float>,
                               std::vector<Var<float>>,
                               std::function<void(Node<float>&)>);
template Var<double> MakeResult(std::string_view, Tensor<double>,
                                std::vector<Var<double>>,
                                std::function<void(Node<double>&)>);
template void Backward(const Var<float>&, float);
template void Backward(const Var<double>&, double);

}  // namespace spokendial::numerics
