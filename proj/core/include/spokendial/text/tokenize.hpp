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
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"
#include "spokendial/corpus/sample.hpp"
#include "spokendial/text/vocab.hpp"

namespace spokendial::text {

inline constexpr std::size_t kDefaultMaxTextLength = 512;

// Splits one transcript word into subword tokens. Implementations must
// return at least one token for every non-empty word.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> Split(const std::string& word) const = 0;
};

// Word-level: every word is a single token.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> Split(const std::string& word) const override { return {word}; }
};

// Specials followed by every token the tokenizer produces over the corpus,
// in first-seen order.
Vocab BuildVocab(const std::vector<corpus::Dialog>& dialogs, const Tokenizer& tokenizer);

class TruncationError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Token span of one word that carries time targets.
struct WordBoundary {
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // inclusive
  double start_time = 0.0;
  double end_time = 0.0;
  corpus::SpeechTurn turn = corpus::SpeechTurn::kCurrent;

  friend bool operator==(const WordBoundary&, const WordBoundary&) = default;
};

// Token span of one text turn, [begin, end), excluding the separators.
struct TurnSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// <s> t_{i-k} </s> t_{i-k+1} </s> ... </s> t_i </s>
struct TokenizedInput {
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> segment_ids;  // 1 on the tokens of t_i and the final </s>
  std::vector<std::size_t> position_ids;
  // One entry per sample.tpp_words, same order.
  std::vector<WordBoundary> word_boundaries;
  // One entry per kept text turn, oldest first.
  std::vector<TurnSpan> turns;
  // Oldest history turns removed to respect the length limit.
  std::size_t dropped_turns = 0;

  std::size_t size() const { return token_ids.size(); }
};

// Drops whole history turns, oldest first, until the layout fits in
// `max_length`; t_{i-1} and t_i are never cut, so a sample whose last two
// turns alone exceed the limit throws TruncationError. Unknown tokens throw
// VocabError naming the word.
TokenizedInput TokenizeSample(const corpus::Sample& sample, const Vocab& vocab,
                              const Tokenizer& tokenizer,
                              std::size_t max_length = kDefaultMaxTextLength);

}  // namespace spokendial::text
