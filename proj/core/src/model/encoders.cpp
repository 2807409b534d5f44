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

#include "spokendial/model/encoders.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::model {

using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

EncoderConfig EncoderConfig::FullScale() {
  EncoderConfig c;
  c.num_layers = 12;
  c.hidden = 768;
  c.num_heads = 12;
  c.ffn_dim = 3072;
  c.dropout = 0.1;
  c.pos_conv_kernel = 128;
  c.pos_conv_groups = 16;
  return c;
}

LayerOptions EncoderConfig::layer_options() const {
  return {hidden, num_heads, ffn_dim, dropout, layer_norm_eps, true};
}

void EncoderConfig::Validate() const {
  if (hidden == 0 || num_heads == 0 || hidden % num_heads != 0) {
    throw std::invalid_argument("EncoderConfig: hidden must be a positive multiple of num_heads");
  }
  if (ffn_dim == 0) throw std::invalid_argument("EncoderConfig: ffn_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("EncoderConfig: dropout in [0, 1)");
  if (pos_conv_kernel == 0 || pos_conv_groups == 0 || hidden % pos_conv_groups != 0) {
    throw std::invalid_argument("EncoderConfig: hidden must be a multiple of pos_conv_groups");
  }
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"num_layers", c.num_layers},         {"hidden", c.hidden},
       {"num_heads", c.num_heads},           {"ffn_dim", c.ffn_dim},
       {"dropout", c.dropout},               {"layer_norm_eps", c.layer_norm_eps},
       {"pos_conv_kernel", c.pos_conv_kernel}, {"pos_conv_groups", c.pos_conv_groups}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  c = EncoderConfig{};
  c.num_layers = j.value("num_layers", c.num_layers);
  c.hidden = j.value("hidden", c.hidden);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
  c.pos_conv_kernel = j.value("pos_conv_kernel", c.pos_conv_kernel);
  c.pos_conv_groups = j.value("pos_conv_groups", c.pos_conv_groups);
  c.Validate();
}

template <typename T>
ConvPositionalEmbedding<T>::ConvPositionalEmbedding(std::size_t hidden, std::size_t kernel,
                                                    std::size_t groups, std::mt19937_64& rng,
                                                    const std::string& prefix)
    : kernel_(kernel),
      groups_(groups),
      weight_(prefix + ".pos_conv.weight",
              numerics::RandomNormal<T>(hidden, hidden / groups * kernel,
                                        std::sqrt(4.0 / static_cast<double>(kernel * hidden)),
                                        rng)),
      bias_(prefix + ".pos_conv.bias", Tensor<T>::Zeros(1, hidden)) {}

template <typename T>
Var<T> ConvPositionalEmbedding<T>::Forward(const Var<T>& x, const KeyMask& key_valid) const {
  Var<T> input = x;
  if (!key_valid.empty()) {
    if (key_valid.size() != x.rows()) {
      numerics::ThrowShapeMismatch("ConvPositionalEmbedding key mask", x.shape(),
                                   numerics::Shape{key_valid.size()});
    }
    std::vector<T> keep(key_valid.begin(), key_valid.end());
    input = numerics::ScaleRows(x, std::span<const T>(keep));
  }
  auto conv = numerics::Conv1d(input, weight_.var(), bias_.var(),
                               {kernel_, 1, groups_, numerics::Padding::kSame});
  return x + numerics::Gelu(conv);
}

template <typename T>
TextEncoder<T>::TextEncoder(const EncoderConfig& config, std::mt19937_64& rng,
                            const std::string& prefix)
    : stack_((config.Validate(), config.num_layers), config.layer_options(), rng,
             prefix + ".encoder") {}

template <typename T>
SpeechEncoder<T>::SpeechEncoder(const EncoderConfig& config, std::mt19937_64& rng,
                                const std::string& prefix)
    : pos_((config.Validate(), config.hidden), config.pos_conv_kernel, config.pos_conv_groups, rng,
           prefix + ".encoder"),
      stack_(config.num_layers, config.layer_options(), rng, prefix + ".encoder") {}

template <typename T>
Var<T> SpeechEncoder<T>::Forward(const Var<T>& a, const KeyMask& key_valid,
                                 std::mt19937_64* rng) const {
  return stack_.Forward(pos_.Forward(a, key_valid), key_valid, rng);
}

template <typename T>
numerics::ParameterRefs<T> SpeechEncoder<T>::Parameters() {
  auto out = pos_.Parameters();
  for (auto* p : stack_.Parameters()) out.push_back(p);
  return out;
}

namespace {

LayerOptions FusionOptions(const EncoderConfig& c, bool with_ffn) {
  auto o = c.layer_options();
  o.with_ffn = with_ffn;
  return o;
}

KeyMask JoinMasks(const KeyMask& text, std::size_t n, const KeyMask& speech, std::size_t m) {
  if (text.empty() && speech.empty()) return {};
  KeyMask out;
  out.reserve(n + m);
  if (text.empty()) {
    out.assign(n, 1);
  } else {
    out = text;
  }
  if (speech.empty()) {
    out.insert(out.end(), m, 1);
  } else {
    out.insert(out.end(), speech.begin(), speech.end());
  }
  return out;
}

}  // namespace

template <typename T>
FusionModule<T>::FusionModule(const EncoderConfig& config, bool with_ffn, std::mt19937_64& rng,
                              const std::string& prefix)
    : modality_(prefix + ".modality_embedding",
                numerics::RandomNormal<T>(2, (config.Validate(), config.hidden), 0.02, rng)),
      layer_(FusionOptions(config, with_ffn), rng, prefix + ".layer"),
      final_g_(prefix + ".final_norm.gamma", Tensor<T>::Full(1, config.hidden, T(1))),
      final_b_(prefix + ".final_norm.beta", Tensor<T>::Zeros(1, config.hidden)),
      eps_(config.layer_norm_eps) {}

template <typename T>
Var<T> FusionModule<T>::Combine(const Var<T>& text, const Var<T>& speech) const {
  auto m = modality_.var();
  const Var<T> parts[] = {numerics::AddRow(text, numerics::SliceRows(m, 0, 1)),
                          numerics::AddRow(speech, numerics::SliceRows(m, 1, 2))};
  return numerics::ConcatRows<T>(parts);
}

template <typename T>
FusedRepresentation<T> FusionModule<T>::Forward(const Var<T>& text, const Var<T>& speech,
                                                const KeyMask& text_valid,
                                                const KeyMask& speech_valid,
                                                std::mt19937_64* rng,
                                                bool capture_attention) const {
  if (text.cols() != speech.cols()) {
    numerics::ThrowShapeMismatch("FusionModule", text.shape(), speech.shape());
  }
  if (!text_valid.empty() && text_valid.size() != text.rows()) {
    throw numerics::ShapeError("FusionModule: text mask length differs from text rows");
  }
  if (!speech_valid.empty() && speech_valid.size() != speech.rows()) {
    throw numerics::ShapeError("FusionModule: speech mask length differs from speech rows");
  }
  FusedRepresentation<T> out;
  out.text_length = text.rows();
  out.speech_length = speech.rows();
  out.key_valid = JoinMasks(text_valid, text.rows(), speech_valid, speech.rows());
  AttentionCapture<T> capture;
  auto h = layer_.Forward(Combine(text, speech), out.key_valid, rng,
                          capture_attention ? &capture : nullptr);
  out.hidden = numerics::LayerNorm(h, final_g_.var(), final_b_.var(), static_cast<T>(eps_));
  if (capture_attention) out.attention = std::move(capture);
  return out;
}

template <typename T>
numerics::ParameterRefs<T> FusionModule<T>::Parameters() {
  numerics::ParameterRefs<T> out = {&modality_};
  for (auto* p : layer_.Parameters()) out.push_back(p);
  out.push_back(&final_g_);
  out.push_back(&final_b_);
  return out;
}

template class ConvPositionalEmbedding<float>;
template class ConvPositionalEmbedding<double>;
template class TextEncoder<float>;
template class TextEncoder<double>;
template class SpeechEncoder<float>;
template class SpeechEncoder<double>;
template class FusionModule<float>;
template class FusionModule<double>;

}  // namespace spokendial::model
