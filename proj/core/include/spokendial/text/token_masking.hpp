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
#include <vector>

namespace spokendial::text {

enum class Corruption { kMaskToken, kRandomToken, kKeep };

struct TokenMaskConfig {
  double probability = 0.15;
  // Split of the selected tokens; the remainder is kept unchanged.
  double mask_fraction = 0.8;
  double random_fraction = 0.1;

  void Validate() const;
};

// Selected positions in increasing order, with what was written there and
// the original id as the prediction label.
struct TextMaskPlan {
  std::vector<std::size_t> positions;
  std::vector<Corruption> actions;
  std::vector<std::size_t> replacements;
  std::vector<std::size_t> labels;

  bool empty() const { return positions.empty(); }
  std::size_t size() const { return positions.size(); }
};

// Selects each non-special token independently with the configured
// probability. Random replacements are uniform over the non-special ids of a
// vocab of `vocab_size`; with no regular tokens they fall back to <mask>.
TextMaskPlan MaskTokens(std::span<const std::size_t> token_ids, std::size_t vocab_size,
                        std::mt19937_64& rng, const TokenMaskConfig& config = {});

std::vector<std::size_t> ApplyTextMask(std::span<const std::size_t> token_ids,
                                       const TextMaskPlan& plan);

}  // namespace spokendial::text
