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

#include "spokendial/model/model.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace spokendial::model {

using numerics::Var;

void ModelConfig::Validate() const {
  if (vocab_size <= text::Vocab::kNumSpecials) {
    throw std::invalid_argument("ModelConfig: vocab_size must exceed the special tokens");
  }
  if (max_text_length == 0) throw std::invalid_argument("ModelConfig: max_text_length is 0");
  frontend.Validate();
  text.Validate();
  speech.Validate();
  fusion.Validate();
  if (text.hidden != speech.hidden || text.hidden != fusion.hidden ||
      text.hidden != frontend.hidden) {
    throw std::invalid_argument("ModelConfig: text, speech, fusion and frontend hidden sizes differ");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"vocab_size", c.vocab_size}, {"max_text_length", c.max_text_length},
       {"frontend", c.frontend},     {"text", c.text},
       {"speech", c.speech},         {"fusion", c.fusion},
       {"fusion_ffn", c.fusion_ffn}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_text_length = j.value("max_text_length", c.max_text_length);
  if (j.contains("frontend")) c.frontend = j.at("frontend").get<speech::FrontendConfig>();
  if (j.contains("text")) c.text = j.at("text").get<EncoderConfig>();
  if (j.contains("speech")) c.speech = j.at("speech").get<EncoderConfig>();
  if (j.contains("fusion")) c.fusion = j.at("fusion").get<EncoderConfig>();
  c.fusion_ffn = j.value("fusion_ffn", c.fusion_ffn);
}

template <typename T>
SpeechTextModel<T>::SpeechTextModel(const ModelConfig& config, std::uint64_t seed)
    : config_((config.Validate(), config)),
      init_rng_(seed),
      text_embedding_(config.vocab_size, config.max_text_length, config.hidden(), init_rng_),
      text_encoder_(config.text, init_rng_),
      frontend_(config.frontend, init_rng_),
      speech_encoder_(config.speech, init_rng_),
      fusion_(config.fusion, config.fusion_ffn, init_rng_) {}

template <typename T>
ModelOutput<T> SpeechTextModel<T>::Forward(const TextInput& text, const Var<T>& prev_features,
                                           const Var<T>& cur_features, std::mt19937_64* rng,
                                           bool capture_attention) const {
  auto x = text_embedding_.Embed(text.token_ids, text.position_ids, text.segment_ids);
  auto ht = text_encoder_.Forward(x, text.valid, rng);
  auto seq = frontend_.Assemble(frontend_.Project(prev_features), frontend_.Project(cur_features));
  auto hs = speech_encoder_.Forward(seq.features, {}, rng);
  ModelOutput<T> out;
  out.fused = fusion_.Forward(ht, hs, text.valid, {}, rng, capture_attention);
  out.prev_frames = seq.prev_length;
  out.cur_frames = seq.cur_length;
  return out;
}

template <typename T>
numerics::ParameterRefs<T> SpeechTextModel<T>::Parameters() {
  numerics::ParameterRefs<T> out;
  auto append = [&](numerics::ParameterRefs<T> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  append(text_embedding_.Parameters());
  append(text_encoder_.Parameters());
  append(frontend_.Parameters());
  append(speech_encoder_.Parameters());
  append(fusion_.Parameters());
  return out;
}

template class SpeechTextModel<float>;
template class SpeechTextModel<double>;

}  // namespace spokendial::model
