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

#include "spokendial/train/presets.hpp"

namespace spokendial::train {

model::ModelConfig DeskModel(std::size_t hidden, std::size_t layers) {
  model::ModelConfig m;
  for (auto* e : {&m.text, &m.speech}) e->num_layers = layers;
  for (auto* e : {&m.text, &m.speech, &m.fusion}) {
    e->hidden = hidden;
    e->ffn_dim = 4 * hidden;
  }
  m.frontend.hidden = hidden;
  return m;
}

corpus::SyntheticConfig OverfitCorpus() {
  corpus::SyntheticConfig c;
  c.num_dialogs = 8;
  c.min_turns = c.max_turns = 5;
  c.vocab_size = 64;
  c.topic_size = 6;
  c.min_words = 2;
  c.max_words = 4;
  return c;
}

TrainConfig OverfitPretrain() {
  TrainConfig c;
  c.seed = 1;
  c.batch_size = 64;
  c.steps = 500;
  c.peak_lr = 3e-3;
  c.warmup_fraction = 0.05;
  c.adamw.weight_decay = 0.0;
  // Desk turns last a few dozen frames; full-size spans would blank them.
  c.objectives.acoustic_mask.min_span = 2;
  c.objectives.acoustic_mask.max_span = 5;
  c.model = DeskModel(64, 1);
  return c;
}

corpus::SyntheticConfig CrossModalCorpus() {
  corpus::SyntheticConfig c;
  c.num_dialogs = 128;
  c.min_turns = c.max_turns = 5;
  c.vocab_size = 16;
  c.min_words = c.max_words = 3;
  c.noise_std = 0.05;
  return c;
}

TrainConfig CrossModalPretrain() {
  TrainConfig c = OverfitPretrain();
  c.seed = 2;
  c.batch_size = 8;
  c.steps = 100;
  c.peak_lr = 1e-3;
  c.model = DeskModel(32, 1);
  return c;
}

TrainConfig CrossModalFinetune() {
  TrainConfig c = TrainConfig::FinetuneDefaults();
  c.seed = 3;
  c.batch_size = 16;
  c.steps = 300;
  c.peak_lr = 1e-3;
  c.warmup_fraction = 0.1;
  c.model = DeskModel(32, 1);
  return c;
}

}  // namespace spokendial::train
