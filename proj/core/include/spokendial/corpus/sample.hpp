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
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"

namespace spokendial::corpus {

// Which of the two speech-bearing turns a time-annotated word belongs to.
enum class SpeechTurn { kPrevious = 0, kCurrent = 1 };

// A word with time targets for temporal position prediction. Times are
// relative to the start of that word's own turn waveform.
struct TimedWord {
  std::string word;
  double start_time = 0.0;
  double end_time = 0.0;
  SpeechTurn turn = SpeechTurn::kCurrent;
  // Index of the word inside its turn's transcript.
  std::size_t word_index = 0;

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

// One pre-training instance built around a target turn i > 1: the text of
// turns max(1, i-k)..i and the speech of turns i-1 and i.
struct Sample {
  std::string dialog_id;
  // 1-based index i of the current turn.
  std::size_t target_turn_index = 0;
  // Oldest first; the last two entries are t_{i-1} and t_i.
  std::vector<std::vector<std::string>> text_turns;
  std::vector<float> speech_prev;
  std::vector<float> speech_cur;
  double sample_rate = 100.0;
  std::vector<TimedWord> tpp_words;
  std::size_t prev_length = 0;  // words in t_{i-1}
  std::size_t cur_length = 0;   // words in t_i
  int tone_prev = 0;
  int tone_cur = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// One sample per turn i in 2..n, in temporal order; dialogs with fewer than
// two turns give none. Throws ValidationError for invalid alignments and
// std::invalid_argument when k == 0.
std::vector<Sample> BuildSamples(const Dialog& dialog, std::size_t k,
                                 double max_turn_seconds = kDefaultMaxTurnSeconds);

}  // namespace spokendial::corpus
