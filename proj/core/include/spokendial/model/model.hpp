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
#include <nlohmann/json_fwd.hpp>
#include <random>
#include <span>
#include <string>

#include "spokendial/model/encoders.hpp"
#include "spokendial/speech/frontend.hpp"
#include "spokendial/text/embedding.hpp"

namespace spokendial::model {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t max_text_length = 512;
  speech::FrontendConfig frontend;
  EncoderConfig text;
  EncoderConfig speech;
  EncoderConfig fusion{.num_layers = 1};
  bool fusion_ffn = true;

  // Throws std::invalid_argument unless every hidden size agrees.
  void Validate() const;
  std::size_t hidden() const { return text.hidden; }
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Token ids may already carry masking corruption.
struct TextInput {
  std::span<const std::size_t> token_ids;
  std::span<const std::size_t> position_ids;
  std::span<const std::size_t> segment_ids;
  KeyMask valid;
};

template <typename T>
struct ModelOutput {
  FusedRepresentation<T> fused;
  std::size_t prev_frames = 0;
  std::size_t cur_frames = 0;

  // Fused row of the speech [CLS], [SEP] and frame j of each turn.
  std::size_t CLSRow() const { return fused.text_length; }
  std::size_t SEPRow() const { return fused.text_length + 1 + prev_frames; }
  std::size_t PrevFrameRow(std::size_t j) const { return fused.text_length + 1 + j; }
  std::size_t CurFrameRow(std::size_t j) const { return fused.text_length + prev_frames + 2 + j; }
};

// Text embedding and encoder, speech frontend and encoder, and the fusion
// layer. Task heads live with their objectives.
template <typename T>
class SpeechTextModel {
 public:
  SpeechTextModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // Extractor output (before masking and projection).
  numerics::Var<T> ExtractFeatures(std::span<const float> waveform) const {
    return frontend_.Extract(waveform);
  }

  // `prev_features` and `cur_features` are extractor outputs, possibly
  // masked. Dropout is active only when `rng` is non-null.
  ModelOutput<T> Forward(const TextInput& text, const numerics::Var<T>& prev_features,
                         const numerics::Var<T>& cur_features, std::mt19937_64* rng = nullptr,
                         bool capture_attention = false) const;

  text::TextEmbedding<T>& text_embedding() { return text_embedding_; }
  speech::SpeechFrontend<T>& frontend() { return frontend_; }
  SpeechEncoder<T>& speech_encoder() { return speech_encoder_; }
  FusionModule<T>& fusion() { return fusion_; }
  numerics::ParameterRefs<T> Parameters();

 private:
  ModelConfig config_;
  std::mt19937_64 init_rng_;
  text::TextEmbedding<T> text_embedding_;
  TextEncoder<T> text_encoder_;
  speech::SpeechFrontend<T> frontend_;
  SpeechEncoder<T> speech_encoder_;
  FusionModule<T> fusion_;
};

extern template class SpeechTextModel<float>;
extern template class SpeechTextModel<double>;

}  // namespace spokendial::model
