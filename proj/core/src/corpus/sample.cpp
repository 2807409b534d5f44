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

#include "spokendial/corpus/sample.hpp"

#include <algorithm>
#include <stdexcept>

namespace spokendial::corpus {

namespace {

void AppendTimedWords(const Turn& turn, SpeechTurn which, std::vector<TimedWord>& out) {
  for (std::size_t j = 0; j < turn.words.size(); ++j) {
    const auto& w = turn.words[j];
    out.push_back({w.word, w.start_time, w.end_time, which, j});
  }
}

}  // namespace

std::vector<Sample> BuildSamples(const Dialog& dialog, std::size_t k,
                                 double max_turn_seconds) {
  if (k == 0) throw std::invalid_argument("BuildSamples: k must be at least 1");
  std::vector<Sample> samples;
  if (dialog.turns.size() < 2) return samples;
  ValidateDialog(dialog, max_turn_seconds);

  samples.reserve(dialog.turns.size() - 1);
  // pos is the 0-based position of turn i = pos + 1.
  for (std::size_t pos = 1; pos < dialog.turns.size(); ++pos) {
    const Turn& prev = dialog.turns[pos - 1];
    const Turn& cur = dialog.turns[pos];
    const std::size_t history = std::min(k, pos);

    Sample s;
    s.dialog_id = dialog.dialog_id;
    s.target_turn_index = pos + 1;
    for (std::size_t t = pos - history; t <= pos; ++t) {
      s.text_turns.push_back(dialog.turns[t].transcript());
    }
    s.speech_prev = prev.waveform;
    s.speech_cur = cur.waveform;
    s.sample_rate = cur.sample_rate;
    AppendTimedWords(prev, SpeechTurn::kPrevious, s.tpp_words);
    AppendTimedWords(cur, SpeechTurn::kCurrent, s.tpp_words);
    s.prev_length = prev.word_count();
    s.cur_length = cur.word_count();
    s.tone_prev = prev.tone;
    s.tone_cur = cur.tone;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace spokendial::corpus
