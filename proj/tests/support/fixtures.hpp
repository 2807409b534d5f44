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
#include <vector>

#include "spokendial/corpus/sample.hpp"
#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/model/model.hpp"
#include "spokendial/text/tokenize.hpp"

namespace spokendial::testing {

// A handful of short dialogs at the default 100 values per second.
inline corpus::SyntheticConfig TinyCorpusConfig(std::size_t dialogs = 4) {
  corpus::SyntheticConfig c;
  c.num_dialogs = dialogs;
  c.min_turns = 2;
  c.max_turns = 4;
  c.vocab_size = 12;
  c.min_words = 2;
  c.max_words = 3;
  c.min_word_periods = 1;
  c.max_word_periods = 2;
  c.max_gap_periods = 1;
  return c;
}

inline model::EncoderConfig TinyEncoder(std::size_t hidden = 8, std::size_t layers = 1) {
  model::EncoderConfig c;
  c.num_layers = layers;
  c.hidden = hidden;
  c.num_heads = 2;
  c.ffn_dim = 2 * hidden;
  c.pos_conv_kernel = 3;
  c.pos_conv_groups = 2;
  return c;
}

inline model::ModelConfig TinyModelConfig(std::size_t vocab_size, std::size_t hidden = 8,
                                          std::size_t layers = 1) {
  model::ModelConfig c;
  c.vocab_size = vocab_size;
  c.max_text_length = 128;
  c.frontend.layers = {{6, 5, 5}, {6, 2, 2}};
  c.frontend.hidden = hidden;
  c.text = c.speech = TinyEncoder(hidden, layers);
  c.fusion = TinyEncoder(hidden, 1);
  return c;
}

template <typename T>
std::vector<T> Values(const numerics::Tensor<T>& t) {
  return {t.values().begin(), t.values().end()};
}

inline std::vector<corpus::Sample> AllSamples(const std::vector<corpus::Dialog>& dialogs,
                                              std::size_t k = 7) {
  std::vector<corpus::Sample> out;
  for (const auto& d : dialogs) {
    for (auto& s : corpus::BuildSamples(d, k)) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace spokendial::testing
