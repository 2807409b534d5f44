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
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"
#include "spokendial/corpus/sample.hpp"
#include "spokendial/finetune/head.hpp"
#include "spokendial/text/tokenize.hpp"
#include "spokendial/text/vocab.hpp"

namespace spokendial::finetune {

// Names the sample whose current turn is `turn` (1-based, >= 2) in a dialog.
struct SampleLocator {
  std::string dialog_id;
  std::size_t turn = 2;

  friend bool operator==(const SampleLocator&, const SampleLocator&) = default;
};

struct LabeledExample {
  SampleLocator locator;
  double label = 0.0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// JSON lines, one {"dialog_id", "turn", "label"} object per example.
void WriteLabeledManifest(const std::filesystem::path& path,
                          std::span<const LabeledExample> examples);
// Throws std::runtime_error naming the line for malformed input.
std::vector<LabeledExample> ReadLabeledManifest(const std::filesystem::path& path);

// Four classes over synthetic dialogs: 2 * text_bit + speech_bit. The text
// bit is set when a strict majority of the current turn's words have ids
// below vocab_size / 2; the speech bit is the current turn's tone, which exists
// only in the waveform.
inline constexpr std::size_t kCrossModalClasses = 4;
int CrossModalTextBit(const corpus::Turn& turn, std::size_t vocab_size);
std::vector<LabeledExample> LabelCrossModal(std::span<const corpus::Dialog> dialogs,
                                            std::size_t vocab_size);

// Builds the sample for each locator with `k` history turns. Throws
// std::invalid_argument for unknown dialogs or turns.
std::vector<corpus::Sample> ResolveSamples(std::span<const corpus::Dialog> dialogs,
                                           std::span<const LabeledExample> examples,
                                           std::size_t k);

// Replaces both speech turns with Gaussian noise of the same length.
void ReplaceSpeechWithNoise(corpus::Sample& sample, std::mt19937_64& rng, double stddev);

struct FinetuneInput {
  text::TokenizedInput tokens;
  corpus::Sample sample;
  double label = 0.0;
};

std::vector<FinetuneInput> PrepareInputs(std::span<const corpus::Sample> samples,
                                         std::span<const LabeledExample> examples,
                                         const text::Vocab& vocab,
                                         const text::Tokenizer& tokenizer,
                                         std::size_t max_text_length);

// Full forward pass to the task output (1 x d_o). Dropout only with `rng`.
template <typename T>
numerics::Var<T> FinetuneForward(const FinetuneModel<T>& model, const FinetuneInput& input,
                                 std::mt19937_64* rng = nullptr);

struct Evaluation {
  double metric = 0.0;
  std::vector<std::vector<double>> outputs;
};

// Runs the model over `inputs` on up to `threads` threads (parameters are
// only read) and scores the outputs with Accuracy. Throws on an empty set.
template <typename T>
Evaluation Evaluate(const FinetuneModel<T>& model, std::span<const FinetuneInput> inputs,
                    std::size_t threads = 1);

}  // namespace spokendial::finetune
