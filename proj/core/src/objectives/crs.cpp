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

#include "spokendial/objectives/crs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spokendial::objectives {

using corpus::SpeechTurn;

void CrsConfig::Validate() const {
  double total = 0.0;
  for (double p : class_probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("CrsConfig: class probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("CrsConfig: class probabilities must sum to 1");
  }
}

CrsSampler::CrsSampler(const std::vector<corpus::Dialog>& dialogs) : dialogs_(dialogs) {
  std::vector<std::string> ids;
  for (std::size_t d = 0; d < dialogs.size(); ++d) {
    if (!dialogs[d].turns.empty()) ids.push_back(dialogs[d].dialog_id);
    for (std::size_t t = 0; t < dialogs[d].turns.size(); ++t) turns_.emplace_back(d, t);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) {
    throw std::invalid_argument("CrsSampler: negatives need at least two dialogs with turns");
  }
}

const corpus::Turn& CrsSampler::DrawForeignTurn(const std::string& dialog_id,
                                                std::mt19937_64& rng, TurnRef& ref) const {
  std::uniform_int_distribution<std::size_t> pick(0, turns_.size() - 1);
  // At least one other dialog exists, so rejection terminates.
  while (true) {
    const auto [d, t] = turns_[pick(rng)];
    if (dialogs_[d].dialog_id == dialog_id) continue;
    ref = {dialogs_[d].dialog_id, dialogs_[d].turns[t].turn_index};
    return dialogs_[d].turns[t];
  }
}

CrsSample CrsSampler::MakeWithLabel(const corpus::Sample& sample, CrsLabel label,
                                    std::mt19937_64& rng) const {
  CrsSample out;
  out.sample = sample;
  out.label = label;
  auto& s = out.sample;
  const bool swap_speech = label == CrsLabel::kSpeechSubstituted || label == CrsLabel::kBothSubstituted;
  const bool swap_text = label == CrsLabel::kTextSubstituted || label == CrsLabel::kBothSubstituted;
  if (swap_speech) {
    TurnRef ref;
    const auto& turn = DrawForeignTurn(sample.dialog_id, rng, ref);
    s.speech_cur = turn.waveform;
    s.tone_cur = turn.tone;
    out.speech_source = ref;
    out.cmam_cur = false;
  }
  if (swap_text) {
    TurnRef ref;
    const auto& turn = DrawForeignTurn(sample.dialog_id, rng, ref);
    s.text_turns.back() = turn.transcript();
    s.cur_length = turn.word_count();
    out.text_source = ref;
  }
  if (label == CrsLabel::kBothSubstituted) {
    s.tpp_words.clear();
    out.cmam_prev = false;
  } else if (label != CrsLabel::kPositive) {
    std::erase_if(s.tpp_words, [](const corpus::TimedWord& w) { return w.turn == SpeechTurn::kCurrent; });
  }
  return out;
}

CrsSample CrsSampler::Make(const corpus::Sample& sample, std::mt19937_64& rng,
                           const CrsConfig& config) const {
  config.Validate();
  std::discrete_distribution<std::size_t> cls(config.class_probs.begin(), config.class_probs.end());
  return MakeWithLabel(sample, static_cast<CrsLabel>(cls(rng)), rng);
}

}  // namespace spokendial::objectives
