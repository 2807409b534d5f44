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

#include "spokendial/masking/acoustic_mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spokendial/numerics/ops.hpp"

namespace spokendial::masking {

AcousticMaskConfig AcousticMaskConfig::Baseline() {
  AcousticMaskConfig c;
  c.trigger_prob = 0.05;
  c.min_span = c.max_span = 3;
  return c;
}

void AcousticMaskConfig::Validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(trigger_prob) || !in_unit(zero_fraction) || !in_unit(random_fraction) ||
      zero_fraction + random_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("AcousticMaskConfig: probabilities must lie in [0, 1]");
  }
  if (min_span == 0 || min_span > max_span) {
    throw std::invalid_argument("AcousticMaskConfig: span range must be nonempty and positive");
  }
}

std::size_t MaskPlan::masked_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

double MaskPlan::masked_fraction() const {
  return mask.empty() ? 0.0 : static_cast<double>(masked_count()) / mask.size();
}

std::vector<std::size_t> MaskPlan::MaskedIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) out.push_back(j);
  }
  return out;
}

MaskPlan PlanSpeechMask(std::size_t length, std::mt19937_64& rng,
                        const AcousticMaskConfig& config) {
  config.Validate();
  if (length == 0) throw std::invalid_argument("PlanSpeechMask: empty sequence");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> frame(0, length - 1);

  MaskPlan plan;
  plan.mask.assign(length, false);
  plan.actions.assign(length, FrameAction::kNone);
  plan.source.resize(length);
  for (std::size_t j = 0; j < length; ++j) plan.source[j] = j;
  const std::size_t n =
      std::uniform_int_distribution<std::size_t>(config.min_span, config.max_span)(rng);
  plan.span_length = n;

  std::size_t i = 0;
  while (i < length) {
    if (unit(rng) < config.trigger_prob) {
      plan.span_starts.push_back(i);
      for (std::size_t j = 0; j < n && i + j < length; ++j) {
        const std::size_t at = i + j;
        const double r = unit(rng);
        const std::size_t t = frame(rng);
        plan.mask[at] = true;
        if (r < config.zero_fraction) {
          plan.actions[at] = FrameAction::kZero;
        } else if (r < config.zero_fraction + config.random_fraction) {
          plan.actions[at] = FrameAction::kRandomFrame;
          plan.source[at] = t;
        } else {
          plan.actions[at] = FrameAction::kKeep;
        }
      }
      i += n;
    } else {
      ++i;
    }
  }
  return plan;
}

template <typename T>
numerics::Var<T> ApplySpeechMask(const numerics::Var<T>& features, const MaskPlan& plan) {
  if (features.rows() != plan.size()) {
    throw numerics::ShapeError("ApplySpeechMask: plan covers " + std::to_string(plan.size()) +
                               " frames, features have " + std::to_string(features.rows()));
  }
  std::vector<T> keep(plan.size(), T(1));
  for (std::size_t j = 0; j < plan.size(); ++j) {
    if (plan.actions[j] == FrameAction::kZero) keep[j] = T(0);
  }
  auto gathered = numerics::GatherRows(features, std::span<const std::size_t>(plan.source));
  return numerics::ScaleRows(gathered, std::span<const T>(keep));
}

template <typename T>
MaskedFeatures<T> MaskSpeechFrames(const numerics::Var<T>& features, std::mt19937_64& rng,
                                   const AcousticMaskConfig& config) {
  MaskedFeatures<T> out;
  out.plan = PlanSpeechMask(features.rows(), rng, config);
  out.features = ApplySpeechMask(features, out.plan);
  return out;
}

MaskRateEstimate EstimateMaskRate(const AcousticMaskConfig& config, std::size_t length,
                                  std::size_t trials, std::uint64_t seed, std::size_t threads) {
  config.Validate();
  if (trials < kMinEstimateTrials) {
    throw std::invalid_argument("EstimateMaskRate: need at least " +
                                std::to_string(kMinEstimateTrials) + " trials");
  }
  constexpr std::size_t kChunk = 10000;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<double> sum(chunks, 0.0), sum_sq(chunks, 0.0);
  auto run_chunk = [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t count = std::min(kChunk, trials - c * kChunk);
    for (std::size_t t = 0; t < count; ++t) {
      const double f = PlanSpeechMask(length, rng, config).masked_fraction();
      sum[c] += f;
      sum_sq[c] += f * f;
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += threads) run_chunk(c);
      });
    }
  }
  double total = 0.0, total_sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sum[c];
    total_sq += sum_sq[c];
  }
  const double n = static_cast<double>(trials);
  MaskRateEstimate est;
  est.trials = trials;
  est.mean = total / n;
  const double var = std::max(0.0, (total_sq - n * est.mean * est.mean) / (n - 1.0));
  est.std_error = std::sqrt(var / n);
  return est;
}

template numerics::Var<float> ApplySpeechMask(const numerics::Var<float>&, const MaskPlan&);
template numerics::Var<double> ApplySpeechMask(const numerics::Var<double>&, const MaskPlan&);
template MaskedFeatures<float> MaskSpeechFrames(const numerics::Var<float>&, std::mt19937_64&,
                                                const AcousticMaskConfig&);
template MaskedFeatures<double> MaskSpeechFrames(const numerics::Var<double>&, std::mt19937_64&,
                                                 const AcousticMaskConfig&);

}  // namespace spokendial::masking
