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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::speech {

struct ConvLayerSpec {
  std::size_t channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

// Valid (unpadded) temporal convolutions over a mono waveform, each followed
// by GELU, then a layer norm over channels. The last layer's channel count is
// the feature dimension.
struct FrontendConfig {
  double sample_rate = 100.0;
  std::vector<ConvLayerSpec> layers = {{32, 5, 5}, {32, 2, 2}};
  std::size_t hidden = 64;
  bool gelu = true;
  double layer_norm_eps = 1e-5;

  // Seven conv layers with the WavLM schedule plus one extra 512-channel,
  // kernel 5, stride 5 layer, at 16 kHz, projected to 768.
  static FrontendConfig FullScale();
  // Two layers with stride product 10 at 100 values per second.
  static FrontendConfig DeskScale() { return {}; }

  std::size_t feature_dim() const { return layers.empty() ? 0 : layers.back().channels; }
  std::size_t StrideSamples() const;
  std::size_t ReceptiveFieldSamples() const;
  double FrameStrideSeconds() const { return StrideSamples() / sample_rate; }
  double ReceptiveFieldSeconds() const { return ReceptiveFieldSamples() / sample_rate; }
  // Equal to the receptive field.
  std::size_t MinimumInputLength() const { return ReceptiveFieldSamples(); }
  // Frames produced for `samples` inputs; throws std::invalid_argument naming
  // the minimum length when the input is too short.
  std::size_t NumFrames(std::size_t samples) const;
  // Samples covered by frame t: [t * stride, t * stride + receptive field).
  std::size_t FrameStartSample(std::size_t t) const { return t * StrideSamples(); }

  void Validate() const;

  friend bool operator==(const FrontendConfig&, const FrontendConfig&) = default;
};

void to_json(nlohmann::json& j, const FrontendConfig& c);
void from_json(const nlohmann::json& j, FrontendConfig& c);

// a_i = [CLS] f_{i-1} [SEP] f_i, all rows d_h wide.
template <typename T>
struct SpeechSequence {
  numerics::Var<T> features;
  std::size_t prev_length = 0;
  std::size_t cur_length = 0;

  std::size_t size() const { return prev_length + cur_length + 2; }
  static constexpr std::size_t cls_index() { return 0; }
  std::size_t sep_index() const { return prev_length + 1; }
  // Row of frame j of f_{i-1} or f_i.
  std::size_t PrevRow(std::size_t j) const { return 1 + j; }
  std::size_t CurRow(std::size_t j) const { return prev_length + 2 + j; }
};

// Throws std::invalid_argument when either turn has no frames.
template <typename T>
SpeechSequence<T> AssembleSpeechSequence(const numerics::Var<T>& prev,
                                         const numerics::Var<T>& cur,
                                         const numerics::Var<T>& cls,
                                         const numerics::Var<T>& sep);

template <typename T>
class SpeechFrontend {
 public:
  SpeechFrontend(const FrontendConfig& config, std::mt19937_64& rng,
                 const std::string& prefix = "speech");

  const FrontendConfig& config() const { return config_; }

  // m x feature_dim, layer-normalized.
  numerics::Var<T> Extract(std::span<const float> waveform) const;
  // Layer norm then a fully connected map to d_h.
  numerics::Var<T> Project(const numerics::Var<T>& features) const;
  SpeechSequence<T> Assemble(const numerics::Var<T>& prev, const numerics::Var<T>& cur) const {
    return AssembleSpeechSequence(prev, cur, cls_.var(), sep_.var());
  }

  numerics::Parameter<T>& projection_weight() { return proj_w_; }
  numerics::Parameter<T>& projection_bias() { return proj_b_; }
  numerics::Parameter<T>& cls() { return cls_; }
  numerics::Parameter<T>& sep() { return sep_; }
  numerics::ParameterRefs<T> Parameters();

 private:
  FrontendConfig config_;
  std::vector<numerics::Parameter<T>> conv_w_;
  std::vector<numerics::Parameter<T>> conv_b_;
  numerics::Parameter<T> extract_gamma_, extract_beta_;
  numerics::Parameter<T> proj_gamma_, proj_beta_;
  numerics::Parameter<T> proj_w_, proj_b_;
  numerics::Parameter<T> cls_, sep_;
};

extern template class SpeechFrontend<float>;
extern template class SpeechFrontend<double>;

}  // namespace spokendial::speech
