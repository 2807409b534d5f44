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

#include "spokendial/finetune/task.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>

#include "spokendial/corpus/synthetic.hpp"

namespace spokendial::finetune {

using numerics::Var;

void WriteLabeledManifest(const std::filesystem::path& path,
                          std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write labeled manifest " + path.string());
  for (const auto& e : examples) {
    nlohmann::json j = {
        {"dialog_id", e.locator.dialog_id}, {"turn", e.locator.turn}, {"label", e.label}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing labeled manifest " + path.string());
}

std::vector<LabeledExample> ReadLabeledManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labeled manifest " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({{j.at("dialog_id").get<std::string>(), j.at("turn").get<std::size_t>()},
                     j.at("label").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

int CrossModalTextBit(const corpus::Turn& turn, std::size_t vocab_size) {
  if (turn.words.empty()) throw std::invalid_argument("CrossModalTextBit: turn has no words");
  std::size_t low = 0;
  for (const auto& w : turn.words) low += corpus::SyntheticWordId(w.word) < vocab_size / 2;
  return 2 * low > turn.words.size() ? 1 : 0;
}

std::vector<LabeledExample> LabelCrossModal(std::span<const corpus::Dialog> dialogs,
                                            std::size_t vocab_size) {
  std::vector<LabeledExample> out;
  for (const auto& d : dialogs) {
    for (std::size_t i = 1; i < d.turns.size(); ++i) {
      const auto& t = d.turns[i];
      const int label = 2 * CrossModalTextBit(t, vocab_size) + (t.tone != 0 ? 1 : 0);
      out.push_back({{d.dialog_id, t.turn_index}, static_cast<double>(label)});
    }
  }
  return out;
}

std::vector<corpus::Sample> ResolveSamples(std::span<const corpus::Dialog> dialogs,
                                           std::span<const LabeledExample> examples,
                                           std::size_t k) {
  std::map<std::string, const corpus::Dialog*> by_id;
  for (const auto& d : dialogs) by_id.emplace(d.dialog_id, &d);
  // Samples are built once per dialog and shared between examples.
  std::map<std::string, std::vector<corpus::Sample>> cache;
  std::vector<corpus::Sample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    auto it = by_id.find(e.locator.dialog_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("unknown dialog '" + e.locator.dialog_id + "'");
    }
    auto [c, fresh] = cache.try_emplace(e.locator.dialog_id);
    if (fresh) c->second = corpus::BuildSamples(*it->second, k);
    const auto& samples = c->second;
    if (e.locator.turn < 2 || e.locator.turn - 2 >= samples.size()) {
      throw std::invalid_argument("dialog '" + e.locator.dialog_id + "' has no sample for turn " +
                                  std::to_string(e.locator.turn));
    }
    out.push_back(samples[e.locator.turn - 2]);
  }
  return out;
}

void ReplaceSpeechWithNoise(corpus::Sample& sample, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> noise(0.0, stddev);
  for (auto* wave : {&sample.speech_prev, &sample.speech_cur}) {
    for (auto& v : *wave) v = static_cast<float>(noise(rng));
  }
  sample.tone_prev = sample.tone_cur = 0;
}

std::vector<FinetuneInput> PrepareInputs(std::span<const corpus::Sample> samples,
                                         std::span<const LabeledExample> examples,
                                         const text::Vocab& vocab,
                                         const text::Tokenizer& tokenizer,
                                         std::size_t max_text_length) {
  if (samples.size() != examples.size()) {
    throw std::invalid_argument("PrepareInputs: samples and labels differ in count");
  }
  std::vector<FinetuneInput> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.push_back({text::TokenizeSample(samples[i], vocab, tokenizer, max_text_length),
                   samples[i], examples[i].label});
  }
  return out;
}

template <typename T>
Var<T> FinetuneForward(const FinetuneModel<T>& model, const FinetuneInput& input,
                       std::mt19937_64* rng) {
  const auto& tok = input.tokens;
  model::TextInput text{tok.token_ids, tok.position_ids, tok.segment_ids, {}};
  auto prev = model.encoder.ExtractFeatures(input.sample.speech_prev);
  auto cur = model.encoder.ExtractFeatures(input.sample.speech_cur);
  auto out = model.encoder.Forward(text, prev, cur, rng);
  return Predict(out.fused.hidden, model.head, model.task);
}

template <typename T>
Evaluation Evaluate(const FinetuneModel<T>& model, std::span<const FinetuneInput> inputs,
                    std::size_t threads) {
  if (inputs.empty()) throw std::invalid_argument("Evaluate: empty dataset");
  Evaluation ev;
  ev.outputs.resize(inputs.size());
  auto run = [&](std::size_t i) {
    const auto out = FinetuneForward(model, inputs[i]);
    const auto& v = out.value();
    ev.outputs[i].assign(v.data(), v.data() + v.size());
  };
  threads = std::clamp<std::size_t>(threads, 1, inputs.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) run(i);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < inputs.size(); i += threads) run(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<double> labels;
  labels.reserve(inputs.size());
  for (const auto& in : inputs) labels.push_back(in.label);
  ev.metric = Accuracy(model.task, ev.outputs, labels);
  return ev;
}

template Var<float> FinetuneForward(const FinetuneModel<float>&, const FinetuneInput&,
                                    std::mt19937_64*);
template Var<double> FinetuneForward(const FinetuneModel<double>&, const FinetuneInput&,
                                     std::mt19937_64*);
template Evaluation Evaluate(const FinetuneModel<float>&, std::span<const FinetuneInput>,
                             std::size_t);
template Evaluation Evaluate(const FinetuneModel<double>&, std::span<const FinetuneInput>,
                             std::size_t);

}  // namespace spokendial::finetune
