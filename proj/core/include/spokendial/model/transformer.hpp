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
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::model {

// Per-key validity for attention; 0 marks padding. Empty means all valid.
using KeyMask = std::vector<std::uint8_t>;

// Attention probabilities of one layer, one rows x rows matrix per head.
template <typename T>
struct AttentionCapture {
  std::vector<numerics::Tensor<T>> heads;

  numerics::Tensor<double> HeadAverage() const;
};

struct LayerOptions {
  std::size_t hidden = 64;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  double dropout = 0.0;
  double layer_norm_eps = 1e-5;
  bool with_ffn = true;
};

// Pre-norm transformer layer:
//   h = x + Attn(LN(x));  y = h + FFN(LN(h))  with FFN = W2 GELU(W1 h + b1) + b2.
template <typename T>
class TransformerLayer {
 public:
  TransformerLayer(const LayerOptions& options, std::mt19937_64& rng, const std::string& prefix);

  // Dropout is applied only when `rng` is non-null. When `capture` is
  // non-null it receives the attention probabilities.
  numerics::Var<T> Forward(const numerics::Var<T>& x, const KeyMask& key_valid = {},
                           std::mt19937_64* rng = nullptr,
                           AttentionCapture<T>* capture = nullptr) const;

  numerics::ParameterRefs<T> Parameters();

 private:
  LayerOptions options_;
  numerics::Parameter<T> ln1_g_, ln1_b_;
  numerics::Parameter<T> wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
  numerics::Parameter<T> ln2_g_, ln2_b_;
  numerics::Parameter<T> w1_, b1_, w2_, b2_;
};

// A stack of layers followed by a final layer norm. With zero layers the
// stack is the identity.
template <typename T>
class TransformerStack {
 public:
  TransformerStack(std::size_t num_layers, const LayerOptions& options, std::mt19937_64& rng,
                   const std::string& prefix);

  std::size_t num_layers() const { return layers_.size(); }
  numerics::Var<T> Forward(const numerics::Var<T>& x, const KeyMask& key_valid = {},
                           std::mt19937_64* rng = nullptr) const;
  numerics::ParameterRefs<T> Parameters();

 private:
  std::vector<TransformerLayer<T>> layers_;
  numerics::Parameter<T> final_g_, final_b_;
  double eps_;
};

extern template struct AttentionCapture<float>;
extern template struct AttentionCapture<double>;
extern template class TransformerLayer<float>;
extern template class TransformerLayer<double>;
extern template class TransformerStack<float>;
extern template class TransformerStack<double>;

}  // namespace spokendial::model
