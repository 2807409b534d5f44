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

#include "spokendial/text/tokenize.hpp"

namespace spokendial::text {

Vocab BuildVocab(const std::vector<corpus::Dialog>& dialogs, const Tokenizer& tokenizer) {
  Vocab vocab;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      for (const auto& w : t.words) {
        for (const auto& piece : tokenizer.Split(w.word)) vocab.Add(piece);
      }
    }
  }
  return vocab;
}

TokenizedInput TokenizeSample(const corpus::Sample& sample, const Vocab& vocab,
                              const Tokenizer& tokenizer, std::size_t max_length) {
  const std::size_t n_turns = sample.text_turns.size();
  if (n_turns < 2) throw std::invalid_argument("TokenizeSample: need at least two text turns");

  // Token ids per turn, plus the token range of every word.
  struct WordRange {
    std::size_t first, last;
  };
  std::vector<std::vector<std::size_t>> turn_ids(n_turns);
  std::vector<std::vector<WordRange>> word_ranges(n_turns);
  for (std::size_t t = 0; t < n_turns; ++t) {
    for (const auto& word : sample.text_turns[t]) {
      const auto pieces = tokenizer.Split(word);
      if (pieces.empty()) {
        throw std::invalid_argument("TokenizeSample: tokenizer produced no tokens for '" + word +
                                    "'");
      }
      WordRange r{turn_ids[t].size(), 0};
      for (const auto& p : pieces) {
        const auto id = vocab.Find(p);
        if (!id) {
          throw VocabError("out-of-vocabulary word '" + word + "' (token '" + p + "') in dialog '" +
                           sample.dialog_id + "'");
        }
        turn_ids[t].push_back(*id);
      }
      r.last = turn_ids[t].size() - 1;
      word_ranges[t].push_back(r);
    }
  }

  // Layout length: one <s>, then each turn followed by </s>.
  std::size_t first_kept = 0;
  auto length_from = [&](std::size_t first) {
    std::size_t n = 1;
    for (std::size_t t = first; t < n_turns; ++t) n += turn_ids[t].size() + 1;
    return n;
  };
  while (length_from(first_kept) > max_length) {
    if (first_kept + 2 >= n_turns) {
      throw TruncationError("TokenizeSample: last two turns of dialog '" + sample.dialog_id +
                            "' need " + std::to_string(length_from(first_kept)) +
                            " tokens, limit is " + std::to_string(max_length));
    }
    ++first_kept;
  }

  TokenizedInput out;
  out.dropped_turns = first_kept;
  out.token_ids.push_back(Vocab::kBos);
  std::vector<std::size_t> turn_begin(n_turns, 0);
  for (std::size_t t = first_kept; t < n_turns; ++t) {
    turn_begin[t] = out.token_ids.size();
    out.token_ids.insert(out.token_ids.end(), turn_ids[t].begin(), turn_ids[t].end());
    out.turns.push_back({turn_begin[t], out.token_ids.size()});
    out.token_ids.push_back(Vocab::kEos);
  }
  const std::size_t n = out.token_ids.size();
  const std::size_t cur_begin = turn_begin[n_turns - 1];
  out.segment_ids.assign(n, 0);
  for (std::size_t j = cur_begin; j < n; ++j) out.segment_ids[j] = 1;
  out.position_ids.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.position_ids[j] = j;

  for (const auto& tw : sample.tpp_words) {
    const std::size_t t = tw.turn == corpus::SpeechTurn::kPrevious ? n_turns - 2 : n_turns - 1;
    if (tw.word_index >= word_ranges[t].size() || sample.text_turns[t][tw.word_index] != tw.word) {
      throw std::invalid_argument("TokenizeSample: timed word '" + tw.word +
                                  "' does not match the text of its turn");
    }
    const auto& r = word_ranges[t][tw.word_index];
    out.word_boundaries.push_back(
        {turn_begin[t] + r.first, turn_begin[t] + r.last, tw.start_time, tw.end_time, tw.turn});
  }
  return out;
}

}  // namespace spokendial::text
