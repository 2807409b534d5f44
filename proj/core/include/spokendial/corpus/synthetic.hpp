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
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"

namespace spokendial::corpus {

// Synthetic aligned dialogs. Every word id v owns a fixed pattern of `period`
// samples (its signature); a spoken word is that pattern repeated for a
// whole number of periods, so word boundaries fall on period boundaries and
// the recorded alignment is exact. Silence between words is zero plus noise.
struct SyntheticConfig {
  std::size_t num_dialogs = 16;
  std::size_t min_turns = 2;
  std::size_t max_turns = 8;
  std::size_t vocab_size = 32;
  std::size_t min_words = 3;
  std::size_t max_words = 6;
  // When nonzero, each dialog draws its words from its own random subset
  // of this many ids, so turns of one dialog share a topic.
  std::size_t topic_size = 0;
  // Waveform values per second.
  double frame_rate = 100.0;
  std::size_t period = 10;
  std::size_t min_word_periods = 2;
  std::size_t max_word_periods = 5;
  std::size_t max_gap_periods = 2;
  double noise_std = 0.0;
  // Turns with tone 1 carry an alternating +/- tone_amplitude component.
  double tone_amplitude = 0.5;
  double max_turn_seconds = kDefaultMaxTurnSeconds;

  // Throws std::invalid_argument for vocab_size < 8, frame_rate < 10 or
  // inconsistent ranges.
  void Validate() const;
};

std::string SyntheticWord(std::size_t id);
// Inverse of SyntheticWord; throws std::invalid_argument for other strings.
std::size_t SyntheticWordId(const std::string& word);

// The signature of word `id`. Independent of the corpus seed, so corpora
// generated with different seeds share one acoustic vocabulary.
std::vector<float> WordSignature(std::size_t id, std::size_t period);

// Pure function of (config, seed).
std::vector<Dialog> GenerateSynthetic(const SyntheticConfig& config, std::uint64_t seed);

// Renders one turn for the given word ids and tone. Words that would push
// the turn past max_turn_seconds are dropped (truncation at a word boundary);
// at least one word is always kept.
Turn RenderTurn(const SyntheticConfig& config, const std::vector<std::size_t>& word_ids,
                int tone, std::size_t turn_index, std::uint64_t seed);

}  // namespace spokendial::corpus
