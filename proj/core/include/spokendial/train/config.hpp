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
#include <nlohmann/json.hpp>
#include <string>

#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/finetune/head.hpp"
#include "spokendial/model/model.hpp"
#include "spokendial/objectives/pretraining.hpp"
#include "spokendial/train/optimizer.hpp"
#include "spokendial/train/schedule.hpp"

namespace spokendial::train {

// Environment variable read for the worker thread count.
inline constexpr const char* kThreadsEnv = "SPOKENDIAL_THREADS";
// Value of kThreadsEnv, or 1 when unset. Throws std::invalid_argument for
// anything but a positive integer.
std::size_t ThreadsFromEnv();

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t batch_size = 8;
  std::size_t steps = 500;
  double peak_lr = 1e-4;
  double warmup_fraction = 0.01;
  ScheduleKind schedule = ScheduleKind::kLinear;
  AdamWConfig adamw;
  // Global gradient norm limit; <= 0 disables clipping.
  double grad_clip = 1.0;
  // Loss weights, CRS and masking settings.
  objectives::PretrainOptions objectives;
  // Normalizer for TPP targets, in seconds.
  double max_speech_seconds = objectives::kDefaultMaxSpeechSeconds;
  // History turns k.
  std::size_t history_turns = 7;
  // Leading share of the dialogs used for training, in (0, 1].
  double corpus_fraction = 1.0;
  // Save a checkpoint every this many steps when a path is given; 0 saves
  // only at the end.
  std::size_t checkpoint_every = 0;
  // Keeps the convolutional feature extractor and its norm at their
  // initial values.
  bool freeze_extractor = false;
  model::ModelConfig model;
  // Fine-tuning only.
  finetune::TaskSpec task = finetune::TaskSpec::Classification(4);
  // Fine-tuning only: replace all speech with Gaussian noise of this std.
  bool speech_noise = false;
  double noise_std = 0.5;

  static TrainConfig FinetuneDefaults();
  void Validate() const;
  Schedule schedule_for_run() const;
};

nlohmann::json ToJson(const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected so typos do
// not pass silently.
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
TrainConfig LoadTrainConfig(const std::filesystem::path& path);

nlohmann::json ToJson(const corpus::SyntheticConfig& c);
corpus::SyntheticConfig SyntheticConfigFromJson(const nlohmann::json& j);

}  // namespace spokendial::train
