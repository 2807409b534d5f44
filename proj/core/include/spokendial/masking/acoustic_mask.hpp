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

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::masking {

enum class FrameAction { kNone, kZero, kRandomFrame, kKeep };

struct AcousticMaskConfig {
  double trigger_prob = 0.15;
  // One span length per call, uniform over [min_span, max_span].
  std::size_t min_span = 20;
  std::size_t max_span = 50;
  double zero_fraction = 0.8;
  double random_fraction = 0.1;

  // Short fixed spans: span 3, trigger 0.05.
  static AcousticMaskConfig Baseline();
  void Validate() const;
};

struct MaskPlan {
  std::vector<bool> mask;
  // kNone exactly where mask is false.
  std::vector<FrameAction> actions;
  // Source frame for kRandomFrame entries; the frame itself elsewhere.
  std::vector<std::size_t> source;
  std::vector<std::size_t> span_starts;
  std::size_t span_length = 0;

  std::size_t size() const { return mask.size(); }
  std::size_t masked_count() const;
  double masked_fraction() const;
  std::vector<std::size_t> MaskedIndices() const;
};

// Scans i = 0..l-1; with probability trigger_prob masks [i, i+n) clipped to
// l and jumps to i+n, otherwise steps to i+1. Every masked frame is zeroed,
// replaced by a uniformly drawn frame of the same sequence, or kept, in the
// configured proportions.
MaskPlan PlanSpeechMask(std::size_t length, std::mt19937_64& rng,
                        const AcousticMaskConfig& config = {});

// Applies the plan to the rows of `features`. Random-frame rows copy the
// unmasked source row. Differentiable with respect to `features`.
template <typename T>
numerics::Var<T> ApplySpeechMask(const numerics::Var<T>& features, const MaskPlan& plan);

template <typename T>
struct MaskedFeatures {
  numerics::Var<T> features;
  MaskPlan plan;
};

template <typename T>
MaskedFeatures<T> MaskSpeechFrames(const numerics::Var<T>& features, std::mt19937_64& rng,
                                   const AcousticMaskConfig& config = {});

struct MaskRateEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

inline constexpr std::size_t kMinEstimateTrials = 10000;

// Monte Carlo mean of the masked fraction for sequences of `length` frames.
// Trials run in fixed chunks with seeds derived from (seed, chunk), so the
// result depends only on the arguments, not on `threads`. Requires
// trials >= kMinEstimateTrials.
MaskRateEstimate EstimateMaskRate(const AcousticMaskConfig& config, std::size_t length,
                                  std::size_t trials, std::uint64_t seed, std::size_t threads = 1);

}  // namespace spokendial::masking
