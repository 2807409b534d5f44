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
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <random>
#include <string>

#include "spokendial/model/transformer.hpp"
#include "spokendial/numerics/autograd.hpp"

namespace spokendial::model {

struct EncoderConfig {
  std::size_t num_layers = 2;
  std::size_t hidden = 64;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  double dropout = 0.0;
  double layer_norm_eps = 1e-5;
  // Speech side only.
  std::size_t pos_conv_kernel = 15;
  std::size_t pos_conv_groups = 4;

  // 12 layers, d_h 768, 12 heads, kernel 128 in 16 groups.
  static EncoderConfig FullScale();
  LayerOptions layer_options() const;
  void Validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

// x + GELU(grouped "same" conv over time). Padded rows are zeroed before the
// convolution so they never leak into real positions.
template <typename T>
class ConvPositionalEmbedding {
 public:
  ConvPositionalEmbedding(std::size_t hidden, std::size_t kernel, std::size_t groups,
                          std::mt19937_64& rng, const std::string& prefix);

  numerics::Var<T> Forward(const numerics::Var<T>& x, const KeyMask& key_valid = {}) const;
  numerics::Parameter<T>& weight() { return weight_; }
  numerics::Parameter<T>& bias() { return bias_; }
  numerics::ParameterRefs<T> Parameters() { return {&weight_, &bias_}; }

 private:
  std::size_t kernel_, groups_;
  numerics::Parameter<T> weight_, bias_;
};

template <typename T>
class TextEncoder {
 public:
  TextEncoder(const EncoderConfig& config, std::mt19937_64& rng, const std::string& prefix = "text");
  numerics::Var<T> Forward(const numerics::Var<T>& x, const KeyMask& key_valid = {},
                           std::mt19937_64* rng = nullptr) const {
    return stack_.Forward(x, key_valid, rng);
  }
  numerics::ParameterRefs<T> Parameters() { return stack_.Parameters(); }

 private:
  TransformerStack<T> stack_;
};

template <typename T>
class SpeechEncoder {
 public:
  SpeechEncoder(const EncoderConfig& config, std::mt19937_64& rng,
                const std::string& prefix = "speech");
  numerics::Var<T> Forward(const numerics::Var<T>& a, const KeyMask& key_valid = {},
                           std::mt19937_64* rng = nullptr) const;
  ConvPositionalEmbedding<T>& positional() { return pos_; }
  numerics::ParameterRefs<T> Parameters();

 private:
  ConvPositionalEmbedding<T> pos_;
  TransformerStack<T> stack_;
};

// H = fusion(concat(H_t + e_m0, H_s + e_m1)); text rows first.
template <typename T>
struct FusedRepresentation {
  numerics::Var<T> hidden;
  std::size_t text_length = 0;
  std::size_t speech_length = 0;
  KeyMask key_valid;
  std::optional<AttentionCapture<T>> attention;

  std::size_t size() const { return text_length + speech_length; }
  std::size_t speech_begin() const { return text_length; }
  std::size_t SpeechRow(std::size_t j) const { return text_length + j; }
};

template <typename T>
class FusionModule {
 public:
  // `with_ffn` false keeps only the self-attention sublayer.
  FusionModule(const EncoderConfig& config, bool with_ffn, std::mt19937_64& rng,
               const std::string& prefix = "fusion");

  // The fused input before attention; exposed for tests.
  numerics::Var<T> Combine(const numerics::Var<T>& text, const numerics::Var<T>& speech) const;
  FusedRepresentation<T> Forward(const numerics::Var<T>& text, const numerics::Var<T>& speech,
                                 const KeyMask& text_valid = {}, const KeyMask& speech_valid = {},
                                 std::mt19937_64* rng = nullptr,
                                 bool capture_attention = false) const;

  numerics::Parameter<T>& modality() { return modality_; }
  numerics::ParameterRefs<T> Parameters();

 private:
  numerics::Parameter<T> modality_;
  TransformerLayer<T> layer_;
  numerics::Parameter<T> final_g_, final_b_;
  double eps_;
};

extern template class ConvPositionalEmbedding<float>;
extern template class ConvPositionalEmbedding<double>;
extern template class TextEncoder<float>;
extern template class TextEncoder<double>;
extern template class SpeechEncoder<float>;
extern template class SpeechEncoder<double>;
extern template class FusionModule<float>;
extern template class FusionModule<double>;

}  // namespace spokendial::model
