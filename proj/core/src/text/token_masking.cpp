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

#include "spokendial/text/token_masking.hpp"

#include <stdexcept>

#include "spokendial/text/vocab.hpp"

namespace spokendial::text {

void TokenMaskConfig::Validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(probability) || !in_unit(mask_fraction) || !in_unit(random_fraction) ||
      mask_fraction + random_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("TokenMaskConfig: probabilities must lie in [0, 1]");
  }
}

TextMaskPlan MaskTokens(std::span<const std::size_t> token_ids, std::size_t vocab_size,
                        std::mt19937_64& rng, const TokenMaskConfig& config) {
  config.Validate();
  TextMaskPlan plan;
  if (config.probability == 0.0) return plan;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool has_regular = vocab_size > Vocab::kNumSpecials;
  for (std::size_t j = 0; j < token_ids.size(); ++j) {
    if (Vocab::IsSpecial(token_ids[j])) continue;
    if (unit(rng) >= config.probability) continue;
    const double u = unit(rng);
    Corruption action = Corruption::kKeep;
    std::size_t written = token_ids[j];
    if (u < config.mask_fraction) {
      action = Corruption::kMaskToken;
      written = Vocab::kMask;
    } else if (u < config.mask_fraction + config.random_fraction) {
      if (has_regular) {
        action = Corruption::kRandomToken;
        written = std::uniform_int_distribution<std::size_t>(Vocab::kNumSpecials,
                                                             vocab_size - 1)(rng);
      } else {
        action = Corruption::kMaskToken;
        written = Vocab::kMask;
      }
    }
    plan.positions.push_back(j);
    plan.actions.push_back(action);
    plan.replacements.push_back(written);
    plan.labels.push_back(token_ids[j]);
  }
  return plan;
}

std::vector<std::size_t> ApplyTextMask(std::span<const std::size_t> token_ids,
                                       const TextMaskPlan& plan) {
  std::vector<std::size_t> out(token_ids.begin(), token_ids.end());
  for (std::size_t m = 0; m < plan.size(); ++m) {
    if (plan.positions[m] >= out.size()) {
      throw std::out_of_range("ApplyTextMask: plan position beyond the sequence");
    }
    out[plan.positions[m]] = plan.replacements[m];
  }
  return out;
}

}  // namespace spokendial::text
