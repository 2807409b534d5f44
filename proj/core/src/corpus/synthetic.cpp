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

#include "spokendial/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spokendial::corpus {

namespace {

constexpr std::uint64_t kSignatureSalt = 0x9e3779b97f4a7c15ULL;

std::size_t Draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

void SyntheticConfig::Validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("SyntheticConfig: " + m); };
  if (vocab_size < 8) fail("vocab_size must be at least 8");
  if (frame_rate < 10.0) fail("frame_rate must be at least 10 per second");
  if (period == 0) fail("period must be positive");
  if (min_turns == 0 || min_turns > max_turns) fail("invalid turn range");
  if (min_words == 0 || min_words > max_words) fail("invalid words-per-turn range");
  if (min_word_periods == 0 || min_word_periods > max_word_periods) {
    fail("invalid word duration range");
  }
  if (noise_std < 0.0) fail("noise_std must be non-negative");
  if (topic_size > vocab_size) fail("topic_size exceeds vocab_size");
  const double min_turn = static_cast<double>(min_word_periods * period) / frame_rate;
  if (min_turn > max_turn_seconds) fail("a single word does not fit in max_turn_seconds");
}

std::string SyntheticWord(std::size_t id) { return "w" + std::to_string(id); }

std::size_t SyntheticWordId(const std::string& word) {
  if (word.size() < 2 || word[0] != 'w') {
    throw std::invalid_argument("not a synthetic word: '" + word + "'");
  }
  std::size_t id = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (word[i] < '0' || word[i] > '9') {
      throw std::invalid_argument("not a synthetic word: '" + word + "'");
    }
    id = id * 10 + static_cast<std::size_t>(word[i] - '0');
  }
  return id;
}

std::vector<float> WordSignature(std::size_t id, std::size_t period) {
  std::mt19937_64 rng(kSignatureSalt * (id + 1));
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<float> sig(period);
  for (auto& v : sig) v = static_cast<float>(dist(rng));
  return sig;
}

Turn RenderTurn(const SyntheticConfig& config, const std::vector<std::size_t>& word_ids,
                int tone, std::size_t turn_index, std::uint64_t seed) {
  if (word_ids.empty()) throw std::invalid_argument("RenderTurn: no words");
  std::mt19937_64 rng(seed);
  const std::size_t p = config.period;
  const auto max_samples =
      static_cast<std::size_t>(std::floor(config.max_turn_seconds * config.frame_rate));

  Turn turn;
  turn.turn_index = turn_index;
  turn.sample_rate = config.frame_rate;
  turn.tone = tone;

  // Lay out [gap word]* gap, all in whole periods.
  struct Placed {
    std::size_t id, start, length;
  };
  std::vector<Placed> placed;
  std::size_t cursor = Draw(rng, 0, config.max_gap_periods) * p;
  for (std::size_t id : word_ids) {
    std::size_t len = Draw(rng, config.min_word_periods, config.max_word_periods) * p;
    const std::size_t gap = Draw(rng, 0, config.max_gap_periods) * p;
    if (cursor + len > max_samples) {
      if (!placed.empty()) break;
      // The first word always survives; drop its leading silence and, if
      // still needed, shorten it to the limit.
      cursor = 0;
      len = std::min(len, max_samples / p * p);
    }
    placed.push_back({id, cursor, len});
    cursor += len + gap;
  }
  const std::size_t total = std::min(cursor, std::max(max_samples, placed.back().start + placed.back().length));

  turn.waveform.assign(total, 0.0f);
  for (const auto& w : placed) {
    const auto sig = WordSignature(w.id, p);
    for (std::size_t t = 0; t < w.length; ++t) turn.waveform[w.start + t] = sig[t % p];
    turn.words.push_back({SyntheticWord(w.id),
                          static_cast<double>(w.start) / config.frame_rate,
                          static_cast<double>(w.start + w.length) / config.frame_rate});
  }
  if (tone != 0) {
    for (std::size_t t = 0; t < total; ++t) {
      turn.waveform[t] += static_cast<float>((t % 2 == 0 ? 1.0 : -1.0) * config.tone_amplitude);
    }
  }
  if (config.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_std);
    for (auto& v : turn.waveform) v += static_cast<float>(noise(rng));
  }
  return turn;
}

std::vector<Dialog> GenerateSynthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  std::vector<Dialog> dialogs;
  dialogs.reserve(config.num_dialogs);
  for (std::size_t d = 0; d < config.num_dialogs; ++d) {
    Dialog dialog;
    dialog.dialog_id = "s" + std::to_string(seed) + "-d" + std::to_string(d);
    const std::size_t n_turns = Draw(rng, config.min_turns, config.max_turns);
    std::vector<std::size_t> topic;
    if (config.topic_size > 0) {
      std::vector<std::size_t> all(config.vocab_size);
      std::iota(all.begin(), all.end(), std::size_t{0});
      for (std::size_t j = 0; j < config.topic_size; ++j) {
        std::swap(all[j], all[Draw(rng, j, config.vocab_size - 1)]);
      }
      topic.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(config.topic_size));
    }
    for (std::size_t t = 0; t < n_turns; ++t) {
      std::vector<std::size_t> ids(Draw(rng, config.min_words, config.max_words));
      for (auto& id : ids) {
        id = topic.empty() ? Draw(rng, 0, config.vocab_size - 1)
                           : topic[Draw(rng, 0, topic.size() - 1)];
      }
      const int tone = static_cast<int>(Draw(rng, 0, 1));
      dialog.turns.push_back(RenderTurn(config, ids, tone, t + 1, rng()));
    }
    dialogs.push_back(std::move(dialog));
  }
  return dialogs;
}

}  // namespace spokendial::corpus
