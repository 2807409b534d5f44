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

#include "spokendial/corpus/dialog.hpp"

#include <sstream>

namespace spokendial::corpus {

std::vector<std::string> Turn::transcript() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.word);
  return out;
}

std::vector<AlignmentViolation> ValidateAlignment(const Turn& turn,
                                                  double max_turn_seconds) {
  std::vector<AlignmentViolation> out;
  auto report = [&](std::size_t j, std::string msg) {
    out.push_back({j, std::move(msg)});
  };
  const double duration = turn.duration();
  if (turn.words.empty()) report(AlignmentViolation{}.word_index, "empty transcript");
  if (duration > max_turn_seconds) {
    std::ostringstream os;
    os << "duration " << duration << " s exceeds max_turn_seconds " << max_turn_seconds;
    report(AlignmentViolation{}.word_index, os.str());
  }
  for (std::size_t j = 0; j < turn.words.size(); ++j) {
    const auto& w = turn.words[j];
    if (w.word.empty()) report(j, "empty word at " + std::to_string(j));
    if (w.start_time < 0.0) report(j, "negative start at " + std::to_string(j));
    if (!(w.start_time < w.end_time)) {
      report(j, "start not before end at " + std::to_string(j));
    }
    if (w.end_time > duration) report(j, "word " + std::to_string(j) + " exceeds duration");
    if (j + 1 < turn.words.size()) {
      const auto& next = turn.words[j + 1];
      if (next.start_time < w.start_time) {
        report(j, "unsorted at " + std::to_string(j) + ", " + std::to_string(j + 1));
      } else if (next.start_time < w.end_time) {
        report(j, "overlap at " + std::to_string(j) + ", " + std::to_string(j + 1));
      }
    }
  }
  return out;
}

void ValidateDialog(const Dialog& dialog, double max_turn_seconds) {
  for (const auto& turn : dialog.turns) {
    auto violations = ValidateAlignment(turn, max_turn_seconds);
    if (!violations.empty()) {
      throw ValidationError("dialog '" + dialog.dialog_id + "' turn " +
                            std::to_string(turn.turn_index) + ": " +
                            violations.front().message);
    }
  }
}

}  // namespace spokendial::corpus
