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

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"
#include "spokendial/corpus/sample.hpp"

namespace spokendial::objectives {

enum class CrsLabel : std::size_t {
  kPositive = 0,
  kSpeechSubstituted = 1,
  kTextSubstituted = 2,
  kBothSubstituted = 3,
};

struct CrsConfig {
  std::array<double, 4> class_probs = {0.25, 0.25, 0.25, 0.25};

  void Validate() const;
};

struct TurnRef {
  std::string dialog_id;
  std::size_t turn_index = 0;

  friend bool operator==(const TurnRef&, const TurnRef&) = default;
};

// A possibly corrupted sample. Substituted turns lose their time targets:
// tpp_words keeps only words of turns that are still aligned, and the cmam
// flags say which speech turns still provide reconstruction targets.
struct CrsSample {
  corpus::Sample sample;
  CrsLabel label = CrsLabel::kPositive;
  bool cmam_prev = true;
  bool cmam_cur = true;
  std::optional<TurnRef> text_source;
  std::optional<TurnRef> speech_source;

  std::size_t label_index() const { return static_cast<std::size_t>(label); }
};

// Draws negatives from the turns of other dialogs. Holds a reference to
// `dialogs`, which must outlive the sampler.
class CrsSampler {
 public:
  // Throws std::invalid_argument unless there are at least two dialogs.
  explicit CrsSampler(const std::vector<corpus::Dialog>& dialogs);

  CrsSample Make(const corpus::Sample& sample, std::mt19937_64& rng,
                 const CrsConfig& config = {}) const;
  // Applies a given class; useful for evaluation over every class.
  CrsSample MakeWithLabel(const corpus::Sample& sample, CrsLabel label,
                          std::mt19937_64& rng) const;

 private:
  const corpus::Turn& DrawForeignTurn(const std::string& dialog_id, std::mt19937_64& rng,
                                      TurnRef& ref) const;

  const std::vector<corpus::Dialog>& dialogs_;
  // (dialog, turn) for every turn.
  std::vector<std::pair<std::size_t, std::size_t>> turns_;
};

}  // namespace spokendial::objectives
