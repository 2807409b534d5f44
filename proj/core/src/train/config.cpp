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

#include "spokendial/train/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

namespace spokendial::train {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so misspelled settings fail loudly.
void CheckKeys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

json ObjectivesToJson(const objectives::PretrainOptions& o) {
  const auto& a = o.acoustic_mask;
  return {{"alpha", o.weights.alpha},
          {"use_crs", o.weights.use_crs},
          {"crs_class_probs", o.crs.class_probs},
          {"token_mask",
           {{"probability", o.token_mask.probability},
            {"mask_fraction", o.token_mask.mask_fraction},
            {"random_fraction", o.token_mask.random_fraction}}},
          {"acoustic_mask",
           {{"trigger_prob", a.trigger_prob},
            {"min_span", a.min_span},
            {"max_span", a.max_span},
            {"zero_fraction", a.zero_fraction},
            {"random_fraction", a.random_fraction}}},
          {"tpp_on_masked", o.tpp_on_masked},
          {"max_text_length", o.max_text_length}};
}

objectives::PretrainOptions ObjectivesFromJson(const json& j) {
  CheckKeys(j,
            {"alpha", "use_crs", "crs_class_probs", "token_mask", "acoustic_mask", "tpp_on_masked",
             "max_text_length"},
            "objectives");
  objectives::PretrainOptions o;
  o.weights.alpha = j.value("alpha", o.weights.alpha);
  o.weights.use_crs = j.value("use_crs", o.weights.use_crs);
  if (j.contains("crs_class_probs")) {
    o.crs.class_probs = j.at("crs_class_probs").get<std::array<double, 4>>();
  }
  if (j.contains("token_mask")) {
    const auto& t = j.at("token_mask");
    CheckKeys(t, {"probability", "mask_fraction", "random_fraction"}, "objectives.token_mask");
    o.token_mask.probability = t.value("probability", o.token_mask.probability);
    o.token_mask.mask_fraction = t.value("mask_fraction", o.token_mask.mask_fraction);
    o.token_mask.random_fraction = t.value("random_fraction", o.token_mask.random_fraction);
  }
  if (j.contains("acoustic_mask")) {
    const auto& a = j.at("acoustic_mask");
    CheckKeys(a, {"trigger_prob", "min_span", "max_span", "zero_fraction", "random_fraction"},
              "objectives.acoustic_mask");
    auto& m = o.acoustic_mask;
    m.trigger_prob = a.value("trigger_prob", m.trigger_prob);
    m.min_span = a.value("min_span", m.min_span);
    m.max_span = a.value("max_span", m.max_span);
    m.zero_fraction = a.value("zero_fraction", m.zero_fraction);
    m.random_fraction = a.value("random_fraction", m.random_fraction);
  }
  o.tpp_on_masked = j.value("tpp_on_masked", o.tpp_on_masked);
  o.max_text_length = j.value("max_text_length", o.max_text_length);
  return o;
}

}  // namespace

std::size_t ThreadsFromEnv() {
  const char* raw = std::getenv(kThreadsEnv);
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long long v = std::strtoll(raw, &end, 10);
  if (*end != '\0' || v <= 0) {
    throw std::invalid_argument(std::string(kThreadsEnv) + " must be a positive integer, got '" +
                                raw + "'");
  }
  return static_cast<std::size_t>(v);
}

TrainConfig TrainConfig::FinetuneDefaults() {
  TrainConfig c;
  c.peak_lr = 2e-5;
  c.schedule = ScheduleKind::kCosine;
  return c;
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (steps == 0) throw std::invalid_argument("TrainConfig: steps must be positive");
  if (history_turns == 0) throw std::invalid_argument("TrainConfig: history_turns must be >= 1");
  if (!(corpus_fraction > 0.0 && corpus_fraction <= 1.0)) {
    throw std::invalid_argument("TrainConfig: corpus_fraction must lie in (0, 1]");
  }
  if (!(max_speech_seconds > 0.0)) {
    throw std::invalid_argument("TrainConfig: max_speech_seconds must be positive");
  }
  if (!(noise_std >= 0.0)) throw std::invalid_argument("TrainConfig: noise_std must be >= 0");
  schedule_for_run().Validate();
  adamw.Validate();
  objectives.weights.Validate();
  objectives.crs.Validate();
  objectives.token_mask.Validate();
  objectives.acoustic_mask.Validate();
  task.Validate();
}

Schedule TrainConfig::schedule_for_run() const {
  return {schedule, peak_lr, warmup_fraction, steps};
}

json ToJson(const TrainConfig& c) {
  json model = c.model;
  json task = c.task;
  return {{"seed", c.seed},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"peak_lr", c.peak_lr},
          {"warmup_fraction", c.warmup_fraction},
          {"schedule", ScheduleName(c.schedule)},
          {"adamw",
           {{"beta1", c.adamw.beta1},
            {"beta2", c.adamw.beta2},
            {"epsilon", c.adamw.epsilon},
            {"weight_decay", c.adamw.weight_decay}}},
          {"grad_clip", c.grad_clip},
          {"objectives", ObjectivesToJson(c.objectives)},
          {"max_speech_seconds", c.max_speech_seconds},
          {"history_turns", c.history_turns},
          {"corpus_fraction", c.corpus_fraction},
          {"checkpoint_every", c.checkpoint_every},
          {"freeze_extractor", c.freeze_extractor},
          {"model", std::move(model)},
          {"task", std::move(task)},
          {"speech_noise", c.speech_noise},
          {"noise_std", c.noise_std}};
}

TrainConfig TrainConfigFromJson(const json& j) {
  CheckKeys(j,
            {"seed", "batch_size", "steps", "peak_lr", "warmup_fraction", "schedule", "adamw",
             "grad_clip", "objectives", "max_speech_seconds", "history_turns", "corpus_fraction",
             "checkpoint_every", "freeze_extractor", "model", "task", "speech_noise", "noise_std"},
            "config");
  TrainConfig c;
  c.seed = j.value("seed", c.seed);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.steps = j.value("steps", c.steps);
  c.peak_lr = j.value("peak_lr", c.peak_lr);
  c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
  if (j.contains("schedule")) c.schedule = ParseSchedule(j.at("schedule").get<std::string>());
  if (j.contains("adamw")) {
    const auto& a = j.at("adamw");
    CheckKeys(a, {"beta1", "beta2", "epsilon", "weight_decay"}, "adamw");
    c.adamw.beta1 = a.value("beta1", c.adamw.beta1);
    c.adamw.beta2 = a.value("beta2", c.adamw.beta2);
    c.adamw.epsilon = a.value("epsilon", c.adamw.epsilon);
    c.adamw.weight_decay = a.value("weight_decay", c.adamw.weight_decay);
  }
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  if (j.contains("objectives")) c.objectives = ObjectivesFromJson(j.at("objectives"));
  c.max_speech_seconds = j.value("max_speech_seconds", c.max_speech_seconds);
  c.history_turns = j.value("history_turns", c.history_turns);
  c.corpus_fraction = j.value("corpus_fraction", c.corpus_fraction);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.freeze_extractor = j.value("freeze_extractor", c.freeze_extractor);
  if (j.contains("model")) c.model = j.at("model").get<model::ModelConfig>();
  if (j.contains("task")) c.task = j.at("task").get<finetune::TaskSpec>();
  c.speech_noise = j.value("speech_noise", c.speech_noise);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.Validate();
  return c;
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return TrainConfigFromJson(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
}

json ToJson(const corpus::SyntheticConfig& c) {
  return {{"num_dialogs", c.num_dialogs},
          {"min_turns", c.min_turns},
          {"max_turns", c.max_turns},
          {"vocab_size", c.vocab_size},
          {"min_words", c.min_words},
          {"max_words", c.max_words},
          {"topic_size", c.topic_size},
          {"frame_rate", c.frame_rate},
          {"period", c.period},
          {"min_word_periods", c.min_word_periods},
          {"max_word_periods", c.max_word_periods},
          {"max_gap_periods", c.max_gap_periods},
          {"noise_std", c.noise_std},
          {"tone_amplitude", c.tone_amplitude},
          {"max_turn_seconds", c.max_turn_seconds}};
}

corpus::SyntheticConfig SyntheticConfigFromJson(const json& j) {
  CheckKeys(j,
            {"num_dialogs", "min_turns", "max_turns", "vocab_size", "min_words", "max_words",
             "topic_size", "frame_rate", "period", "min_word_periods", "max_word_periods",
             "max_gap_periods", "noise_std", "tone_amplitude", "max_turn_seconds"},
            "synthetic");
  corpus::SyntheticConfig c;
  c.num_dialogs = j.value("num_dialogs", c.num_dialogs);
  c.min_turns = j.value("min_turns", c.min_turns);
  c.max_turns = j.value("max_turns", c.max_turns);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.min_words = j.value("min_words", c.min_words);
  c.max_words = j.value("max_words", c.max_words);
  c.topic_size = j.value("topic_size", c.topic_size);
  c.frame_rate = j.value("frame_rate", c.frame_rate);
  c.period = j.value("period", c.period);
  c.min_word_periods = j.value("min_word_periods", c.min_word_periods);
  c.max_word_periods = j.value("max_word_periods", c.max_word_periods);
  c.max_gap_periods = j.value("max_gap_periods", c.max_gap_periods);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.tone_amplitude = j.value("tone_amplitude", c.tone_amplitude);
  c.max_turn_seconds = j.value("max_turn_seconds", c.max_turn_seconds);
  c.Validate();
  return c;
}

}  // namespace spokendial::train
