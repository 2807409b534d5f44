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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"
#include "spokendial/corpus/sample.hpp"
#include "spokendial/finetune/head.hpp"
#include "spokendial/finetune/task.hpp"
#include "spokendial/objectives/crs.hpp"
#include "spokendial/objectives/pretraining.hpp"
#include "spokendial/text/tokenize.hpp"
#include "spokendial/text/vocab.hpp"
#include "spokendial/train/checkpoint.hpp"
#include "spokendial/train/config.hpp"
#include "spokendial/train/metrics.hpp"
#include "spokendial/train/optimizer.hpp"

namespace spokendial::train {

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Independent stream for (seed, step, slot, purpose).
std::mt19937_64 DeriveRng(std::uint64_t seed, std::uint64_t step, std::uint64_t slot,
                          std::uint64_t purpose);

// Visits 0..n-1 in a fresh seeded permutation every epoch. Position p is
// item At(p) of epoch p / n.
class DataOrder {
 public:
  DataOrder(std::size_t n, std::uint64_t seed);
  std::size_t At(std::size_t position);

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::size_t epoch_ = static_cast<std::size_t>(-1);
  std::vector<std::size_t> perm_;
};

// The leading ceil(fraction * n) dialogs, at least one.
std::vector<corpus::Dialog> CorpusSubset(std::vector<corpus::Dialog> dialogs, double fraction);

// Vocab tokens after the specials, as stored in checkpoints.
std::vector<std::string> VocabTokens(const text::Vocab& vocab);

struct RunOptions {
  // Empty: no checkpoint files.
  std::filesystem::path checkpoint_path;
  MetricsLog* metrics = nullptr;
  std::function<void(const MetricsRecord&)> on_step;
  // Stop after this step (0 runs to the configured total).
  std::size_t stop_after = 0;
};

// Joint pre-training. Each step averages gradients over `batch_size`
// examples processed one at a time; example preparation runs on
// ThreadsFromEnv() threads and does not affect results.
class Pretrainer {
 public:
  // Fresh run; the vocabulary is built from the training dialogs.
  Pretrainer(const TrainConfig& config, std::vector<corpus::Dialog> dialogs);
  // Continues from a pre-training checkpoint. Throws std::runtime_error when
  // the corpus has words outside the checkpoint's vocabulary.
  Pretrainer(const Checkpoint& checkpoint, std::vector<corpus::Dialog> dialogs);
  Pretrainer(const Pretrainer&) = delete;
  Pretrainer& operator=(const Pretrainer&) = delete;

  const TrainConfig& config() const { return config_; }
  std::size_t step() const { return step_; }
  const text::Vocab& vocab() const { return vocab_; }
  const std::vector<corpus::Dialog>& dialogs() const { return dialogs_; }
  std::span<const corpus::Sample> samples() const { return samples_; }
  objectives::PretrainModel<float>& model() { return *model_; }
  const objectives::PretrainModel<float>& model() const { return *model_; }

  // Draws corruption and masks for one sample exactly as training does.
  objectives::PretrainExample ExampleFor(std::size_t sample_index, std::mt19937_64& rng) const;

  MetricsRecord Step();
  void Run(const RunOptions& options = {});
  Checkpoint MakeCheckpoint() const;

 private:
  void Init();

  TrainConfig config_;
  std::vector<corpus::Dialog> dialogs_;
  text::Vocab vocab_;
  text::WhitespaceTokenizer tokenizer_;
  std::vector<corpus::Sample> samples_;
  std::unique_ptr<objectives::CrsSampler> sampler_;
  std::unique_ptr<objectives::PretrainModel<float>> model_;
  numerics::ParameterRefs<float> params_;
  std::unique_ptr<AdamW<float>> optimizer_;
  DataOrder order_{1, 0};
  std::size_t step_ = 0;
  std::size_t threads_ = 1;
  std::chrono::steady_clock::time_point start_;
};

struct PretrainDiagnostics {
  // Mean absolute error of predicted normalized start and end times.
  double tpp_mae = 0.0;
  double crs_accuracy = 0.0;
  std::size_t examples = 0;
  std::size_t words = 0;
};

// Scores TPP and CRS on `repeats` fresh draws of every training sample,
// with corruption and masking as in training and dropout off.
PretrainDiagnostics DiagnosePretrain(const Pretrainer& trainer, std::size_t repeats,
                                     std::uint64_t seed);

// Fine-tuning on labeled samples with the prediction head.
class Finetuner {
 public:
  // `pretrained` may be null for training from scratch; otherwise its
  // encoder weights, model config and vocabulary are used.
  Finetuner(const TrainConfig& config, std::vector<corpus::Dialog> dialogs,
            std::vector<finetune::LabeledExample> examples, const Checkpoint* pretrained);
  // Continues from a fine-tuning checkpoint.
  Finetuner(const Checkpoint& checkpoint, std::vector<corpus::Dialog> dialogs,
            std::vector<finetune::LabeledExample> examples);
  Finetuner(const Finetuner&) = delete;
  Finetuner& operator=(const Finetuner&) = delete;

  const TrainConfig& config() const { return config_; }
  std::size_t step() const { return step_; }
  const text::Vocab& vocab() const { return vocab_; }
  finetune::FinetuneModel<float>& model() { return *model_; }

  // Inputs for `examples` from this trainer's dialogs, with speech noise
  // when the config asks for it.
  std::vector<finetune::FinetuneInput> Inputs(
      std::span<const finetune::LabeledExample> examples) const;
  finetune::Evaluation Evaluate(std::span<const finetune::LabeledExample> examples) const;

  MetricsRecord Step();
  void Run(const RunOptions& options = {});
  Checkpoint MakeCheckpoint() const;

 private:
  void Init();

  TrainConfig config_;
  std::vector<corpus::Dialog> dialogs_;
  std::vector<finetune::LabeledExample> examples_;
  text::Vocab vocab_;
  text::WhitespaceTokenizer tokenizer_;
  std::vector<finetune::FinetuneInput> inputs_;
  std::unique_ptr<finetune::FinetuneModel<float>> model_;
  numerics::ParameterRefs<float> params_;
  std::unique_ptr<AdamW<float>> optimizer_;
  DataOrder order_{1, 0};
  std::size_t step_ = 0;
  std::size_t threads_ = 1;
  std::chrono::steady_clock::time_point start_;
};

// Model config and vocabulary stored in a checkpoint.
model::ModelConfig CheckpointModelConfig(const Checkpoint& checkpoint);
text::Vocab CheckpointVocab(const Checkpoint& checkpoint);

}  // namespace spokendial::train
