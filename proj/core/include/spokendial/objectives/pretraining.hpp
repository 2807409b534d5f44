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
#include <vector>

#include "spokendial/masking/acoustic_mask.hpp"
#include "spokendial/model/model.hpp"
#include "spokendial/objectives/crs.hpp"
#include "spokendial/objectives/losses.hpp"
#include "spokendial/text/token_masking.hpp"
#include "spokendial/text/tokenize.hpp"

namespace spokendial::objectives {

struct PretrainOptions {
  LossWeights weights;
  CrsConfig crs;
  text::TokenMaskConfig token_mask;
  masking::AcousticMaskConfig acoustic_mask;
  // When false, TPP skips words whose boundary tokens were masked.
  bool tpp_on_masked = true;
  std::size_t max_text_length = text::kDefaultMaxTextLength;
};

// Every random choice for one training instance, drawn up front so that the
// loss is a deterministic function of the parameters.
struct PretrainExample {
  CrsSample crs;
  text::TokenizedInput tokens;
  text::TextMaskPlan text_mask;
  std::vector<std::size_t> corrupted_ids;
  masking::MaskPlan prev_mask;
  masking::MaskPlan cur_mask;
  std::vector<text::WordBoundary> tpp_boundaries;
};

// `sampler` may be null when CRS is disabled; the sample then stays
// positive.
PretrainExample PrepareExample(const corpus::Sample& sample, const CrsSampler* sampler,
                               const text::Vocab& vocab, const text::Tokenizer& tokenizer,
                               const speech::FrontendConfig& frontend, std::mt19937_64& rng,
                               const PretrainOptions& options);

template <typename T>
struct PretrainHeads {
  PretrainHeads(const model::ModelConfig& config, std::mt19937_64& rng,
                double max_speech_seconds = kDefaultMaxSpeechSeconds);

  TppHead<T> tpp;
  LinearHead<T> crs;
  LinearHead<T> lm;
  LinearHead<T> cmam;

  numerics::ParameterRefs<T> Parameters();
};

template <typename T>
struct PretrainModel {
  PretrainModel(const model::ModelConfig& config, std::uint64_t seed,
                double max_speech_seconds = kDefaultMaxSpeechSeconds);

  model::SpeechTextModel<T> encoder;
  std::mt19937_64 head_rng;
  PretrainHeads<T> heads;

  numerics::ParameterRefs<T> Parameters();
};

template <typename T>
struct PretrainLosses {
  LossComponents<T> components;
  numerics::Var<T> joint;
  model::ModelOutput<T> output;
};

// Forward pass and all four objectives. Dropout runs only with `dropout_rng`.
template <typename T>
PretrainLosses<T> ComputePretrainLosses(const PretrainModel<T>& model, const PretrainExample& ex,
                                        const PretrainOptions& options,
                                        std::mt19937_64* dropout_rng = nullptr,
                                        bool capture_attention = false);

extern template struct PretrainHeads<float>;
extern template struct PretrainHeads<double>;
extern template struct PretrainModel<float>;
extern template struct PretrainModel<double>;

}  // namespace spokendial::objectives
