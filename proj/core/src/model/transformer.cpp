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

#include "spokendial/model/transformer.hpp"

#include <cmath>
#include <stdexcept>

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::model {

using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

template <typename T>
Tensor<double> AttentionCapture<T>::HeadAverage() const {
  if (heads.empty()) throw std::logic_error("AttentionCapture: nothing captured");
  Tensor<double> avg(heads.front().shape());
  for (const auto& h : heads) {
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += static_cast<double>(h[i]);
  }
  for (auto& v : avg.values()) v /= static_cast<double>(heads.size());
  return avg;
}

namespace {

template <typename T>
Parameter<T> Ones(const std::string& name, std::size_t n) {
  return Parameter<T>(name, Tensor<T>::Full(1, n, T(1)));
}

template <typename T>
Parameter<T> Zeros(const std::string& name, std::size_t n) {
  return Parameter<T>(name, Tensor<T>::Zeros(1, n));
}

template <typename T>
Parameter<T> Dense(const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return Parameter<T>(name, numerics::XavierUniform<T>(in, out, rng));
}

template <typename T>
Var<T> Linear(const Var<T>& x, const Parameter<T>& w, const Parameter<T>& b) {
  return numerics::AddRow(numerics::MatMul(x, w.var()), b.var());
}

template <typename T>
Var<T> MaybeDropout(const Var<T>& x, double p, std::mt19937_64* rng) {
  return rng != nullptr && p > 0.0 ? numerics::Dropout(x, p, *rng) : x;
}

}  // namespace

template <typename T>
TransformerLayer<T>::TransformerLayer(const LayerOptions& o, std::mt19937_64& rng,
                                      const std::string& prefix)
    : options_(o),
      ln1_g_(Ones<T>(prefix + ".attn_norm.gamma", o.hidden)),
      ln1_b_(Zeros<T>(prefix + ".attn_norm.beta", o.hidden)),
      wq_(Dense<T>(prefix + ".attn.q.weight", o.hidden, o.hidden, rng)),
      bq_(Zeros<T>(prefix + ".attn.q.bias", o.hidden)),
      wk_(Dense<T>(prefix + ".attn.k.weight", o.hidden, o.hidden, rng)),
      bk_(Zeros<T>(prefix + ".attn.k.bias", o.hidden)),
      wv_(Dense<T>(prefix + ".attn.v.weight", o.hidden, o.hidden, rng)),
      bv_(Zeros<T>(prefix + ".attn.v.bias", o.hidden)),
      wo_(Dense<T>(prefix + ".attn.out.weight", o.hidden, o.hidden, rng)),
      bo_(Zeros<T>(prefix + ".attn.out.bias", o.hidden)),
      ln2_g_(Ones<T>(prefix + ".ffn_norm.gamma", o.hidden)),
      ln2_b_(Zeros<T>(prefix + ".ffn_norm.beta", o.hidden)),
      w1_(Dense<T>(prefix + ".ffn.in.weight", o.hidden, o.ffn_dim, rng)),
      b1_(Zeros<T>(prefix + ".ffn.in.bias", o.ffn_dim)),
      w2_(Dense<T>(prefix + ".ffn.out.weight", o.ffn_dim, o.hidden, rng)),
      b2_(Zeros<T>(prefix + ".ffn.out.bias", o.hidden)) {
  if (o.num_heads == 0 || o.hidden % o.num_heads != 0) {
    throw std::invalid_argument("TransformerLayer: hidden size " + std::to_string(o.hidden) +
                                " is not divisible by " + std::to_string(o.num_heads) + " heads");
  }
}

template <typename T>
Var<T> TransformerLayer<T>::Forward(const Var<T>& x, const KeyMask& key_valid,
                                    std::mt19937_64* rng, AttentionCapture<T>* capture) const {
  if (x.cols() != options_.hidden) {
    numerics::ThrowShapeMismatch("TransformerLayer", x.shape(), wq_.value().shape());
  }
  if (!key_valid.empty() && key_valid.size() != x.rows()) {
    numerics::ThrowShapeMismatch("TransformerLayer key mask", x.shape(),
                                 numerics::Shape{key_valid.size()});
  }
  const T eps = static_cast<T>(options_.layer_norm_eps);
  const std::size_t heads = options_.num_heads;
  const std::size_t dk = options_.hidden / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));

  auto a = numerics::LayerNorm(x, ln1_g_.var(), ln1_b_.var(), eps);
  auto q = Linear(a, wq_, bq_);
  auto k = Linear(a, wk_, bk_);
  auto v = Linear(a, wv_, bv_);
  if (capture != nullptr) capture->heads.clear();
  std::vector<Var<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    auto qh = numerics::SliceCols(q, h * dk, (h + 1) * dk);
    auto kh = numerics::SliceCols(k, h * dk, (h + 1) * dk);
    auto vh = numerics::SliceCols(v, h * dk, (h + 1) * dk);
    auto probs = numerics::SoftmaxRows(numerics::Scale(numerics::MatMulNT(qh, kh), scale),
                                       std::span<const std::uint8_t>(key_valid));
    if (capture != nullptr) capture->heads.push_back(probs.value());
    outs.push_back(numerics::MatMul(MaybeDropout(probs, options_.dropout, rng), vh));
  }
  auto attended = heads == 1 ? outs[0] : numerics::ConcatCols<T>(outs);
  auto h = x + MaybeDropout(Linear(attended, wo_, bo_), options_.dropout, rng);
  if (!options_.with_ffn) return h;
  auto f = numerics::LayerNorm(h, ln2_g_.var(), ln2_b_.var(), eps);
  f = Linear(numerics::Gelu(Linear(f, w1_, b1_)), w2_, b2_);
  return h + MaybeDropout(f, options_.dropout, rng);
}

template <typename T>
numerics::ParameterRefs<T> TransformerLayer<T>::Parameters() {
  numerics::ParameterRefs<T> out = {&ln1_g_, &ln1_b_, &wq_, &bq_, &wk_, &bk_,
                                    &wv_,    &bv_,    &wo_, &bo_};
  if (options_.with_ffn) {
    for (auto* p : {&ln2_g_, &ln2_b_, &w1_, &b1_, &w2_, &b2_}) out.push_back(p);
  }
  return out;
}

template <typename T>
TransformerStack<T>::TransformerStack(std::size_t num_layers, const LayerOptions& options,
                                      std::mt19937_64& rng, const std::string& prefix)
    : final_g_(Ones<T>(prefix + ".final_norm.gamma", options.hidden)),
      final_b_(Zeros<T>(prefix + ".final_norm.beta", options.hidden)),
      eps_(options.layer_norm_eps) {
  layers_.reserve(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    layers_.emplace_back(options, rng, prefix + ".layer" + std::to_string(l));
  }
}

template <typename T>
Var<T> TransformerStack<T>::Forward(const Var<T>& x, const KeyMask& key_valid,
                                    std::mt19937_64* rng) const {
  if (layers_.empty()) return x;
  Var<T> h = x;
  for (const auto& layer : layers_) h = layer.Forward(h, key_valid, rng);
  return numerics::LayerNorm(h, final_g_.var(), final_b_.var(), static_cast<T>(eps_));
}

template <typename T>
numerics::ParameterRefs<T> TransformerStack<T>::Parameters() {
  numerics::ParameterRefs<T> out;
  for (auto& layer : layers_) {
    for (auto* p : layer.Parameters()) out.push_back(p);
  }
  if (!layers_.empty()) {
    out.push_back(&final_g_);
    out.push_back(&final_b_);
  }
  return out;
}

template struct AttentionCapture<float>;
template struct AttentionCapture<double>;
template class TransformerLayer<float>;
template class TransformerLayer<double>;
template class TransformerStack<float>;
template class TransformerStack<double>;

}  // namespace spokendial::model
