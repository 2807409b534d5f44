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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"
#include "spokendial/text/token_masking.hpp"
#include "spokendial/text/tokenize.hpp"

namespace spokendial::objectives {

inline constexpr double kDefaultMaxSpeechSeconds = 10.0;
inline constexpr std::size_t kNumCrsClasses = 4;

// Start and end time regressors, d_h -> 1 each, without bias.
template <typename T>
class TppHead {
 public:
  TppHead(std::size_t hidden, std::mt19937_64& rng, double max_speech_seconds = kDefaultMaxSpeechSeconds,
          const std::string& prefix = "tpp");

  double max_speech_seconds() const { return max_speech_seconds_; }
  numerics::Parameter<T>& start() { return start_; }
  numerics::Parameter<T>& end() { return end_; }
  const numerics::Parameter<T>& start() const { return start_; }
  const numerics::Parameter<T>& end() const { return end_; }
  numerics::ParameterRefs<T> Parameters() { return {&start_, &end_}; }

 private:
  double max_speech_seconds_;
  numerics::Parameter<T> start_, end_;
};

// Predicted normalized start and end times, one per boundary.
struct TppPredictions {
  std::vector<double> start;
  std::vector<double> end;
};

// Mean over words of 1/2 [(w_s . h_first - s / L_a)^2 + (w_e . h_last - e / L_a)^2].
// Boundaries must index rows below `text_length`. No boundaries gives a
// constant 0.
template <typename T>
numerics::Var<T> TppLoss(const numerics::Var<T>& hidden, std::size_t text_length,
                         std::span<const text::WordBoundary> boundaries, const TppHead<T>& head);

template <typename T>
TppPredictions PredictTimes(const numerics::Var<T>& hidden, std::size_t text_length,
                            std::span<const text::WordBoundary> boundaries, const TppHead<T>& head);

// Drops boundaries whose first or last token was selected by the text mask.
std::vector<text::WordBoundary> UnmaskedBoundaries(std::span<const text::WordBoundary> boundaries,
                                                   const text::TextMaskPlan& plan);

// A d_h -> out affine map.
template <typename T>
class LinearHead {
 public:
  LinearHead(std::size_t hidden, std::size_t out, std::mt19937_64& rng, const std::string& prefix);

  numerics::Var<T> Forward(const numerics::Var<T>& rows) const;
  numerics::Parameter<T>& weight() { return weight_; }
  numerics::Parameter<T>& bias() { return bias_; }
  const numerics::Parameter<T>& weight() const { return weight_; }
  const numerics::Parameter<T>& bias() const { return bias_; }
  numerics::ParameterRefs<T> Parameters() { return {&weight_, &bias_}; }

 private:
  numerics::Parameter<T> weight_, bias_;
};

// Four-way classifier on the hidden state of row 0 (<s>).
template <typename T>
numerics::Var<T> CrsLogits(const numerics::Var<T>& hidden, const LinearHead<T>& head);
template <typename T>
numerics::Var<T> CrsLoss(const numerics::Var<T>& hidden, std::size_t label,
                         const LinearHead<T>& head);

// Mean cross-entropy over the masked text positions; an empty plan gives a
// constant 0.
template <typename T>
numerics::Var<T> CmlmLoss(const numerics::Var<T>& hidden, std::size_t text_length,
                          const text::TextMaskPlan& plan, const LinearHead<T>& head);

// Mean absolute error between the head applied to `rows` of `hidden` and the
// matching rows of `targets`; no rows gives a constant 0.
template <typename T>
numerics::Var<T> CmamLoss(const numerics::Var<T>& hidden, std::span<const std::size_t> rows,
                          const numerics::Var<T>& targets, const LinearHead<T>& head);

struct LossWeights {
  double alpha = 1.0;
  bool use_crs = true;

  void Validate() const;
};

// Undefined components are absent and contribute nothing.
template <typename T>
struct LossComponents {
  numerics::Var<T> tpp;
  numerics::Var<T> crs;
  numerics::Var<T> cmlm;
  numerics::Var<T> cmam;
};

// alpha * TPP + CRS + CMLM + CMAM, with CRS dropped when disabled. Throws
// std::invalid_argument when nothing remains.
template <typename T>
numerics::Var<T> JointLoss(const LossComponents<T>& components, const LossWeights& weights);

}  // namespace spokendial::objectives
