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

#include "spokendial/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "spokendial/numerics/ops.hpp"

namespace spokendial::train {

namespace {

// Purposes for DeriveRng.
constexpr std::uint64_t kExampleStream = 0;
constexpr std::uint64_t kDropoutStream = 1;
constexpr std::uint64_t kDiagnosticStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kOrderStream = 4;

void ParallelFor(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += threads) fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// FNV-1a; a stable per-dialog seed component.
std::uint64_t HashId(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<corpus::Sample> AllSamples(const std::vector<corpus::Dialog>& dialogs, std::size_t k) {
  std::vector<corpus::Sample> out;
  for (const auto& d : dialogs) {
    auto s = corpus::BuildSamples(d, k);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

// Every word of the corpus must be known to the vocabulary.
void CheckCoverage(const std::vector<corpus::Dialog>& dialogs, const text::Vocab& vocab,
                   const text::Tokenizer& tokenizer) {
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      for (const auto& w : t.words) {
        for (const auto& piece : tokenizer.Split(w.word)) {
          if (!vocab.Find(piece)) {
            throw std::runtime_error("corpus/vocab mismatch: dialog '" + d.dialog_id +
                                     "' uses token '" + piece +
                                     "' which the checkpoint vocabulary lacks");
          }
        }
      }
    }
  }
}

template <typename Model>
Checkpoint Snapshot(const std::string& kind, std::size_t step, const TrainConfig& config,
                    const text::Vocab& vocab, const numerics::ParameterRefs<float>& params,
                    const AdamW<float>& opt) {
  Checkpoint c;
  c.kind = kind;
  c.step = step;
  c.config = ToJson(config);
  c.vocab = VocabTokens(vocab);
  c.parameters = CaptureParameters(params);
  c.optimizer_step = opt.step_count();
  const auto& trained = opt.parameters();
  for (std::size_t k = 0; k < trained.size(); ++k) {
    c.first_moments.push_back({trained[k]->name(), opt.first_moments()[k]});
    c.second_moments.push_back({trained[k]->name(), opt.second_moments()[k]});
  }
  return c;
}

std::vector<numerics::Tensor<float>> MomentsByName(const numerics::ParameterRefs<float>& params,
                                                   const std::vector<NamedTensor>& records,
                                                   const char* what) {
  std::vector<numerics::Tensor<float>> out;
  for (auto* p : params) {
    auto it = std::find_if(records.begin(), records.end(),
                           [&](const NamedTensor& r) { return r.name == p->name(); });
    if (it == records.end()) {
      throw CheckpointError(std::string("checkpoint has no ") + what + " for '" + p->name() + "'");
    }
    out.push_back(it->value);
  }
  return out;
}

void RestoreOptimizer(AdamW<float>& opt, const Checkpoint& c) {
  const auto& params = opt.parameters();
  opt.Restore(c.optimizer_step, MomentsByName(params, c.first_moments, "first moment"),
              MomentsByName(params, c.second_moments, "second moment"));
}

bool IsExtractorParameter(const std::string& name) {
  return name.starts_with("speech.conv") || name.starts_with("speech.extract_norm.");
}

// The parameters the optimizer updates.
numerics::ParameterRefs<float> Trainable(const numerics::ParameterRefs<float>& params,
                                         bool freeze_extractor) {
  numerics::ParameterRefs<float> out;
  for (auto* p : params) {
    if (!(freeze_extractor && IsExtractorParameter(p->name()))) out.push_back(p);
  }
  return out;
}

void CheckFinite(double v, std::size_t step, const std::string& what) {
  if (!std::isfinite(v)) {
    throw NonFiniteLossError("non-finite " + what + " loss at step " + std::to_string(step + 1));
  }
}

// Forward passes check every op for NaN/Inf; report those as a loss failure
// at this step.
template <typename F>
auto GuardForward(std::size_t step, const std::string& what, F&& f) {
  try {
    return f();
  } catch (const numerics::NonFiniteError& e) {
    throw NonFiniteLossError("non-finite " + what + " loss at step " + std::to_string(step + 1) +
                             " (" + e.what() + ")");
  }
}

template <typename Trainer>
void RunLoop(Trainer& t, const RunOptions& options) {
  const auto& cfg = t.config();
  const std::size_t last = options.stop_after == 0 ? cfg.steps
                                                   : std::min(cfg.steps, options.stop_after);
  while (t.step() < last) {
    const auto rec = t.Step();
    if (options.metrics != nullptr) options.metrics->Append(rec);
    if (options.on_step) options.on_step(rec);
    if (!options.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
        t.step() % cfg.checkpoint_every == 0) {
      SaveCheckpoint(options.checkpoint_path, t.MakeCheckpoint());
    }
  }
  if (!options.checkpoint_path.empty()) SaveCheckpoint(options.checkpoint_path, t.MakeCheckpoint());
}

}  // namespace

std::mt19937_64 DeriveRng(std::uint64_t seed, std::uint64_t step, std::uint64_t slot,
                          std::uint64_t purpose) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(step), hi(step), lo(slot), hi(slot), lo(purpose)};
  return std::mt19937_64(seq);
}

DataOrder::DataOrder(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {
  if (n == 0) throw std::invalid_argument("DataOrder: no items");
}

std::size_t DataOrder::At(std::size_t position) {
  const std::size_t epoch = position / n_;
  if (epoch != epoch_) {
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    auto rng = DeriveRng(seed_, epoch, 0, kOrderStream);
    std::shuffle(perm_.begin(), perm_.end(), rng);
    epoch_ = epoch;
  }
  return perm_[position % n_];
}

std::vector<corpus::Dialog> CorpusSubset(std::vector<corpus::Dialog> dialogs, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("CorpusSubset: fraction must lie in (0, 1]");
  }
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(dialogs.size()) - 1e-9));
  dialogs.resize(std::clamp<std::size_t>(keep, 1, dialogs.size()));
  return dialogs;
}

std::vector<std::string> VocabTokens(const text::Vocab& vocab) {
  std::vector<std::string> out;
  for (std::size_t id = text::Vocab::kNumSpecials; id < vocab.size(); ++id) {
    out.push_back(vocab.Token(id));
  }
  return out;
}

model::ModelConfig CheckpointModelConfig(const Checkpoint& checkpoint) {
  return TrainConfigFromJson(checkpoint.config).model;
}

text::Vocab CheckpointVocab(const Checkpoint& checkpoint) {
  return text::Vocab::FromTokens(checkpoint.vocab);
}

// ---- Pre-training ----

Pretrainer::Pretrainer(const TrainConfig& config, std::vector<corpus::Dialog> dialogs)
    : config_(config), dialogs_(CorpusSubset(std::move(dialogs), config.corpus_fraction)) {
  config_.Validate();
  vocab_ = text::BuildVocab(dialogs_, tokenizer_);
  config_.model.vocab_size = vocab_.size();
  Init();
}

Pretrainer::Pretrainer(const Checkpoint& checkpoint, std::vector<corpus::Dialog> dialogs)
    : config_(TrainConfigFromJson(checkpoint.config)) {
  if (checkpoint.kind != "pretrain") {
    throw CheckpointError("expected a pretrain checkpoint, got '" + checkpoint.kind + "'");
  }
  dialogs_ = CorpusSubset(std::move(dialogs), config_.corpus_fraction);
  vocab_ = CheckpointVocab(checkpoint);
  if (vocab_.size() != config_.model.vocab_size) {
    throw CheckpointError("checkpoint vocabulary has " + std::to_string(vocab_.size()) +
                          " entries but the model expects " +
                          std::to_string(config_.model.vocab_size));
  }
  CheckCoverage(dialogs_, vocab_, tokenizer_);
  Init();
  RestoreParameters(params_, checkpoint.parameters);
  RestoreOptimizer(*optimizer_, checkpoint);
  step_ = checkpoint.step;
}

void Pretrainer::Init() {
  config_.objectives.max_text_length = config_.model.max_text_length;
  samples_ = AllSamples(dialogs_, config_.history_turns);
  if (samples_.empty()) throw std::invalid_argument("Pretrainer: corpus yields no samples");
  if (config_.objectives.weights.use_crs) {
    sampler_ = std::make_unique<objectives::CrsSampler>(dialogs_);
  }
  model_ = std::make_unique<objectives::PretrainModel<float>>(config_.model, config_.seed,
                                                             config_.max_speech_seconds);
  params_ = model_->Parameters();
  optimizer_ = std::make_unique<AdamW<float>>(Trainable(params_, config_.freeze_extractor),
                                              config_.adamw);
  order_ = DataOrder(samples_.size(), config_.seed);
  threads_ = ThreadsFromEnv();
  start_ = std::chrono::steady_clock::now();
}

objectives::PretrainExample Pretrainer::ExampleFor(std::size_t sample_index,
                                                   std::mt19937_64& rng) const {
  return objectives::PrepareExample(samples_.at(sample_index), sampler_.get(), vocab_, tokenizer_,
                                    config_.model.frontend, rng, config_.objectives);
}

MetricsRecord Pretrainer::Step() {
  if (step_ >= config_.steps) throw std::logic_error("Pretrainer: all steps are done");
  const std::size_t batch = config_.batch_size;
  std::vector<std::size_t> picks(batch);
  for (std::size_t b = 0; b < batch; ++b) picks[b] = order_.At(step_ * batch + b);
  std::vector<objectives::PretrainExample> examples(batch);
  ParallelFor(batch, threads_, [&](std::size_t b) {
    auto rng = DeriveRng(config_.seed, step_, b, kExampleStream);
    examples[b] = ExampleFor(picks[b], rng);
  });

  for (auto* p : params_) p->ZeroGrad();
  double joint = 0.0, tpp = 0.0, crs = 0.0, cmlm = 0.0, cmam = 0.0;
  const float scale = 1.0f / static_cast<float>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    auto dropout = DeriveRng(config_.seed, step_, b, kDropoutStream);
    auto l = GuardForward(step_, "joint", [&] {
      return objectives::ComputePretrainLosses(*model_, examples[b], config_.objectives, &dropout);
    });
    const double j = l.joint.value()[0];
    CheckFinite(j, step_, "joint");
    numerics::Backward(l.joint, scale);
    joint += j;
    tpp += l.components.tpp.value()[0];
    if (l.components.crs.defined()) crs += l.components.crs.value()[0];
    cmlm += l.components.cmlm.value()[0];
    cmam += l.components.cmam.value()[0];
  }
  const double norm = ClipGradientNorm(optimizer_->parameters(), config_.grad_clip);
  const double lr = config_.schedule_for_run()(step_ + 1);
  optimizer_->Step(lr);
  ++step_;

  MetricsRecord rec;
  rec.step = step_;
  rec.lr = lr;
  const double n = static_cast<double>(batch);
  rec.values = {{"joint", joint / n}, {"tpp", tpp / n},   {"cmlm", cmlm / n},
                {"cmam", cmam / n},   {"grad_norm", norm}};
  if (config_.objectives.weights.use_crs) rec.values["crs"] = crs / n;
  rec.wall_time = Seconds(start_);
  return rec;
}

void Pretrainer::Run(const RunOptions& options) { RunLoop(*this, options); }

Checkpoint Pretrainer::MakeCheckpoint() const {
  return Snapshot<objectives::PretrainModel<float>>("pretrain", step_, config_, vocab_, params_,
                                                    *optimizer_);
}

PretrainDiagnostics DiagnosePretrain(const Pretrainer& trainer, std::size_t repeats,
                                     std::uint64_t seed) {
  if (repeats == 0) throw std::invalid_argument("DiagnosePretrain: repeats must be positive");
  const auto& model = trainer.model();
  const auto& opts = trainer.config().objectives;
  const std::size_t n = trainer.samples().size();
  std::vector<double> abs_err(n * repeats, 0.0);
  std::vector<std::size_t> words(n * repeats, 0), hits(n * repeats, 0);
  ParallelFor(n * repeats, ThreadsFromEnv(), [&](std::size_t i) {
    auto rng = DeriveRng(seed, i / n, i % n, kDiagnosticStream);
    const auto ex = trainer.ExampleFor(i % n, rng);
    const auto l = objectives::ComputePretrainLosses(model, ex, opts);
    const auto& h = l.output.fused.hidden;
    if (opts.weights.use_crs) {
      const auto logits = objectives::CrsLogits(h, model.heads.crs).value();
      std::size_t best = 0;
      for (std::size_t c = 1; c < logits.size(); ++c) {
        if (logits[c] > logits[best]) best = c;
      }
      hits[i] = best == ex.crs.label_index();
    }
    const auto pred = objectives::PredictTimes(
        h, l.output.fused.text_length, std::span<const text::WordBoundary>(ex.tpp_boundaries),
        model.heads.tpp);
    const double la = model.heads.tpp.max_speech_seconds();
    for (std::size_t w = 0; w < ex.tpp_boundaries.size(); ++w) {
      abs_err[i] += std::abs(pred.start[w] - ex.tpp_boundaries[w].start_time / la) +
                    std::abs(pred.end[w] - ex.tpp_boundaries[w].end_time / la);
    }
    words[i] = ex.tpp_boundaries.size();
  });
  PretrainDiagnostics d;
  d.examples = n * repeats;
  double err = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.examples; ++i) {
    err += abs_err[i];
    d.words += words[i];
    correct += hits[i];
  }
  d.tpp_mae = d.words == 0 ? 0.0 : err / (2.0 * static_cast<double>(d.words));
  d.crs_accuracy = static_cast<double>(correct) / static_cast<double>(d.examples);
  return d;
}

// ---- Fine-tuning ----

Finetuner::Finetuner(const TrainConfig& config, std::vector<corpus::Dialog> dialogs,
                     std::vector<finetune::LabeledExample> examples, const Checkpoint* pretrained)
    : config_(config), dialogs_(std::move(dialogs)), examples_(std::move(examples)) {
  config_.Validate();
  if (pretrained != nullptr) {
    if (pretrained->kind != "pretrain") {
      throw CheckpointError("expected a pretrain checkpoint, got '" + pretrained->kind + "'");
    }
    config_.model = CheckpointModelConfig(*pretrained);
    vocab_ = CheckpointVocab(*pretrained);
    CheckCoverage(dialogs_, vocab_, tokenizer_);
  } else {
    vocab_ = text::BuildVocab(dialogs_, tokenizer_);
    config_.model.vocab_size = vocab_.size();
  }
  Init();
  if (pretrained != nullptr) RestoreParameters(model_->encoder.Parameters(), pretrained->parameters);
}

Finetuner::Finetuner(const Checkpoint& checkpoint, std::vector<corpus::Dialog> dialogs,
                     std::vector<finetune::LabeledExample> examples)
    : config_(TrainConfigFromJson(checkpoint.config)),
      dialogs_(std::move(dialogs)),
      examples_(std::move(examples)) {
  if (checkpoint.kind != "finetune") {
    throw CheckpointError("expected a finetune checkpoint, got '" + checkpoint.kind + "'");
  }
  vocab_ = CheckpointVocab(checkpoint);
  CheckCoverage(dialogs_, vocab_, tokenizer_);
  Init();
  RestoreParameters(params_, checkpoint.parameters);
  RestoreOptimizer(*optimizer_, checkpoint);
  step_ = checkpoint.step;
}

void Finetuner::Init() {
  model_ = std::make_unique<finetune::FinetuneModel<float>>(config_.model, config_.task,
                                                           config_.seed);
  params_ = model_->Parameters();
  optimizer_ = std::make_unique<AdamW<float>>(Trainable(params_, config_.freeze_extractor),
                                              config_.adamw);
  threads_ = ThreadsFromEnv();
  if (!examples_.empty()) {
    inputs_ = Inputs(examples_);
    order_ = DataOrder(inputs_.size(), config_.seed);
  }
  start_ = std::chrono::steady_clock::now();
}

std::vector<finetune::FinetuneInput> Finetuner::Inputs(
    std::span<const finetune::LabeledExample> examples) const {
  auto samples = finetune::ResolveSamples(dialogs_, examples, config_.history_turns);
  if (config_.speech_noise) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& loc = examples[i].locator;
      auto rng = DeriveRng(config_.seed, HashId(loc.dialog_id), loc.turn, kNoiseStream);
      finetune::ReplaceSpeechWithNoise(samples[i], rng, config_.noise_std);
    }
  }
  return finetune::PrepareInputs(samples, examples, vocab_, tokenizer_,
                                 config_.model.max_text_length);
}

finetune::Evaluation Finetuner::Evaluate(
    std::span<const finetune::LabeledExample> examples) const {
  const auto inputs = Inputs(examples);
  return finetune::Evaluate(*model_, std::span<const finetune::FinetuneInput>(inputs), threads_);
}

MetricsRecord Finetuner::Step() {
  if (inputs_.empty()) throw std::logic_error("Finetuner: no training examples");
  if (step_ >= config_.steps) throw std::logic_error("Finetuner: all steps are done");
  const std::size_t batch = config_.batch_size;
  for (auto* p : params_) p->ZeroGrad();
  double loss = 0.0;
  const float scale = 1.0f / static_cast<float>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& in = inputs_[order_.At(step_ * batch + b)];
    auto dropout = DeriveRng(config_.seed, step_, b, kDropoutStream);
    auto l = GuardForward(step_, "task", [&] {
      return finetune::TaskLoss(finetune::FinetuneForward(*model_, in, &dropout), in.label,
                                config_.task);
    });
    const double v = l.value()[0];
    CheckFinite(v, step_, "task");
    numerics::Backward(l, scale);
    loss += v;
  }
  const double norm = ClipGradientNorm(optimizer_->parameters(), config_.grad_clip);
  const double lr = config_.schedule_for_run()(step_ + 1);
  optimizer_->Step(lr);
  ++step_;

  MetricsRecord rec;
  rec.step = step_;
  rec.lr = lr;
  rec.values = {{"loss", loss / static_cast<double>(batch)}, {"grad_norm", norm}};
  rec.wall_time = Seconds(start_);
  return rec;
}

void Finetuner::Run(const RunOptions& options) { RunLoop(*this, options); }

Checkpoint Finetuner::MakeCheckpoint() const {
  return Snapshot<finetune::FinetuneModel<float>>("finetune", step_, config_, vocab_, params_,
                                                  *optimizer_);
}

}  // namespace spokendial::train
