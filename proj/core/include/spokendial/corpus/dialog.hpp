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
#include <stdexcept>
#include <string>
#include <vector>

namespace spokendial::corpus {

inline constexpr double kDefaultMaxTurnSeconds = 10.0;

// One transcript word and where it is spoken, in seconds from the start of
// its own turn's waveform.
struct WordAlignment {
  std::string word;
  double start_time = 0.0;
  double end_time = 0.0;

  friend bool operator==(const WordAlignment&, const WordAlignment&) = default;
};

struct Turn {
  // 1-based position in the dialog.
  std::size_t turn_index = 1;
  double sample_rate = 100.0;
  std::vector<float> waveform;
  std::vector<WordAlignment> words;
  // Latent acoustic attribute rendered into the waveform only (0 or 1). It
  // never appears in the transcript.
  int tone = 0;

  double duration() const {
    return static_cast<double>(waveform.size()) / sample_rate;
  }
  std::size_t word_count() const { return words.size(); }
  std::vector<std::string> transcript() const;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialog {
  std::string dialog_id;
  std::vector<Turn> turns;

  friend bool operator==(const Dialog&, const Dialog&) = default;
};

struct AlignmentViolation {
  // Index of the (first) offending word; npos for turn-level violations.
  std::size_t word_index = static_cast<std::size_t>(-1);
  std::string message;
};

// Checks every WordAlignment and Turn invariant. An empty result means the
// turn is valid.
std::vector<AlignmentViolation> ValidateAlignment(
    const Turn& turn, double max_turn_seconds = kDefaultMaxTurnSeconds);

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ValidationError naming the dialog, turn, and first violation.
void ValidateDialog(const Dialog& dialog,
                    double max_turn_seconds = kDefaultMaxTurnSeconds);

}  // namespace spokendial::corpus
