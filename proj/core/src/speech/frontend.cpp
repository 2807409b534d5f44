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

#include "spokendial/speech/frontend.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::speech {

using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

FrontendConfig FrontendConfig::FullScale() {
  FrontendConfig c;
  c.sample_rate = 16000.0;
  c.layers = {{512, 10, 5}, {512, 3, 2}, {512, 3, 2}, {512, 3, 2},
              {512, 3, 2},  {512, 2, 2}, {512, 2, 2}, {512, 5, 5}};
  c.hidden = 768;
  return c;
}

std::size_t FrontendConfig::StrideSamples() const {
  std::size_t s = 1;
  for (const auto& l : layers) s *= l.stride;
  return s;
}

std::size_t FrontendConfig::ReceptiveFieldSamples() const {
  std::size_t field = 1, jump = 1;
  for (const auto& l : layers) {
    field += (l.kernel - 1) * jump;
    jump *= l.stride;
  }
  return field;
}

std::size_t FrontendConfig::NumFrames(std::size_t samples) const {
  if (samples < MinimumInputLength()) {
    throw std::invalid_argument("speech frontend: waveform of " + std::to_string(samples) +
                                " samples is shorter than the minimum length " +
                                std::to_string(MinimumInputLength()));
  }
  std::size_t n = samples;
  for (const auto& l : layers) n = numerics::Conv1dOutputLength(n, {l.kernel, l.stride});
  return n;
}

void FrontendConfig::Validate() const {
  if (layers.empty()) throw std::invalid_argument("FrontendConfig: no conv layers");
  for (const auto& l : layers) {
    if (l.channels == 0 || l.kernel == 0 || l.stride == 0) {
      throw std::invalid_argument("FrontendConfig: channels, kernel and stride must be positive");
    }
  }
  if (hidden == 0) throw std::invalid_argument("FrontendConfig: hidden must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("FrontendConfig: sample_rate must be positive");
  if (!(layer_norm_eps > 0.0)) throw std::invalid_argument("FrontendConfig: layer_norm_eps must be positive");
}

void to_json(nlohmann::json& j, const FrontendConfig& c) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : c.layers) {
    layers.push_back({{"channels", l.channels}, {"kernel", l.kernel}, {"stride", l.stride}});
  }
  j = {{"sample_rate", c.sample_rate},
       {"layers", layers},
       {"hidden", c.hidden},
       {"gelu", c.gelu},
       {"layer_norm_eps", c.layer_norm_eps}};
}

void from_json(const nlohmann::json& j, FrontendConfig& c) {
  c = FrontendConfig{};
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  if (j.contains("layers")) {
    c.layers.clear();
    for (const auto& l : j.at("layers")) {
      c.layers.push_back({l.at("channels").get<std::size_t>(), l.at("kernel").get<std::size_t>(),
                          l.at("stride").get<std::size_t>()});
    }
  }
  c.hidden = j.value("hidden", c.hidden);
  c.gelu = j.value("gelu", c.gelu);
  c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
  c.Validate();
}

template <typename T>
SpeechSequence<T> AssembleSpeechSequence(const Var<T>& prev, const Var<T>& cur, const Var<T>& cls,
                                         const Var<T>& sep) {
  if (prev.rows() == 0 || cur.rows() == 0) {
    throw std::invalid_argument("AssembleSpeechSequence: empty turn (" +
                                std::to_string(prev.rows()) + " and " +
                                std::to_string(cur.rows()) + " frames)");
  }
  const Var<T> parts[] = {cls, prev, sep, cur};
  return {numerics::ConcatRows<T>(parts), prev.rows(), cur.rows()};
}

template <typename T>
SpeechFrontend<T>::SpeechFrontend(const FrontendConfig& config, std::mt19937_64& rng,
                                  const std::string& prefix)
    : config_((config.Validate(), config)),
      extract_gamma_(prefix + ".extract_norm.gamma", Tensor<T>::Full(1, config.feature_dim(), T(1))),
      extract_beta_(prefix + ".extract_norm.beta", Tensor<T>::Zeros(1, config.feature_dim())),
      proj_gamma_(prefix + ".proj_norm.gamma", Tensor<T>::Full(1, config.feature_dim(), T(1))),
      proj_beta_(prefix + ".proj_norm.beta", Tensor<T>::Zeros(1, config.feature_dim())),
      proj_w_(prefix + ".proj.weight",
              numerics::XavierUniform<T>(config.feature_dim(), config.hidden, rng)),
      proj_b_(prefix + ".proj.bias", Tensor<T>::Zeros(1, config.hidden)),
      cls_(prefix + ".cls", numerics::RandomNormal<T>(1, config.hidden, 0.02, rng)),
      sep_(prefix + ".sep", numerics::RandomNormal<T>(1, config.hidden, 0.02, rng)) {
  std::size_t in = 1;
  for (std::size_t l = 0; l < config_.layers.size(); ++l) {
    const auto& spec = config_.layers[l];
    const double std = std::sqrt(2.0 / static_cast<double>(in * spec.kernel));
    const std::string name = prefix + ".conv" + std::to_string(l);
    conv_w_.emplace_back(name + ".weight",
                         numerics::RandomNormal<T>(spec.channels, in * spec.kernel, std, rng));
    // Nonzero biases keep silent frames from reaching the norm as constant rows.
    const double bound = 1.0 / std::sqrt(static_cast<double>(in * spec.kernel));
    conv_b_.emplace_back(name + ".bias",
                         numerics::RandomUniform<T>(1, spec.channels, -bound, bound, rng));
    in = spec.channels;
  }
}

template <typename T>
Var<T> SpeechFrontend<T>::Extract(std::span<const float> waveform) const {
  config_.NumFrames(waveform.size());
  Tensor<T> x({waveform.size(), 1});
  for (std::size_t i = 0; i < waveform.size(); ++i) x[i] = static_cast<T>(waveform[i]);
  Var<T> h = Var<T>::Constant(std::move(x));
  for (std::size_t l = 0; l < config_.layers.size(); ++l) {
    const auto& spec = config_.layers[l];
    h = numerics::Conv1d(h, conv_w_[l].var(), conv_b_[l].var(), {spec.kernel, spec.stride});
    if (config_.gelu) h = numerics::Gelu(h);
  }
  return numerics::LayerNorm(h, extract_gamma_.var(), extract_beta_.var(),
                             static_cast<T>(config_.layer_norm_eps));
}

template <typename T>
Var<T> SpeechFrontend<T>::Project(const Var<T>& features) const {
  if (features.cols() != config_.feature_dim()) {
    numerics::ThrowShapeMismatch("SpeechFrontend::Project", features.shape(),
                                 proj_w_.value().shape());
  }
  auto normed = numerics::LayerNorm(features, proj_gamma_.var(), proj_beta_.var(),
                                    static_cast<T>(config_.layer_norm_eps));
  return numerics::AddRow(numerics::MatMul(normed, proj_w_.var()), proj_b_.var());
}

template <typename T>
numerics::ParameterRefs<T> SpeechFrontend<T>::Parameters() {
  numerics::ParameterRefs<T> out;
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    out.push_back(&conv_w_[l]);
    out.push_back(&conv_b_[l]);
  }
  for (auto* p : {&extract_gamma_, &extract_beta_, &proj_gamma_, &proj_beta_, &proj_w_, &proj_b_,
                  &cls_, &sep_}) {
    out.push_back(p);
  }
  return out;
}

template SpeechSequence<float> AssembleSpeechSequence(const Var<float>&, const Var<float>&,
                                                      const Var<float>&, const Var<float>&);
template SpeechSequence<double> AssembleSpeechSequence(const Var<double>&, const Var<double>&,
                                                       const Var<double>&, const Var<double>&);
template class SpeechFrontend<float>;
template class SpeechFrontend<double>;

}  // namespace spokendial::speech
