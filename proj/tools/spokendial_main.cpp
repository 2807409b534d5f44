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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spokendial/corpus/shards.hpp"
#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/finetune/task.hpp"
#include "spokendial/masking/acoustic_mask.hpp"
#include "spokendial/model/attention_export.hpp"
#include "spokendial/train/checkpoint.hpp"
#include "spokendial/train/config.hpp"
#include "spokendial/train/presets.hpp"
#include "spokendial/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace spokendial;

namespace {

fs::path ManifestPath(const fs::path& p) { return fs::is_directory(p) ? p / "corpus.json" : p; }

std::vector<corpus::Dialog> LoadDialogs(const fs::path& p) {
  return corpus::LoadCorpus(ManifestPath(p)).dialogs;
}

corpus::SyntheticConfig CorpusPreset(const std::string& name) {
  if (name == "default") return {};
  if (name == "overfit") return train::OverfitCorpus();
  if (name == "cross-modal") return train::CrossModalCorpus();
  throw CLI::ValidationError("--preset", "unknown corpus preset '" + name + "'");
}

train::TrainConfig PretrainPreset(const std::string& name) {
  if (name == "default") return {};
  if (name == "overfit") return train::OverfitPretrain();
  if (name == "cross-modal") return train::CrossModalPretrain();
  throw CLI::ValidationError("--preset", "unknown pretrain preset '" + name + "'");
}

train::TrainConfig FinetunePreset(const std::string& name) {
  if (name == "default") return train::TrainConfig::FinetuneDefaults();
  if (name == "cross-modal") return train::CrossModalFinetune();
  throw CLI::ValidationError("--preset", "unknown finetune preset '" + name + "'");
}

// Options shared by pretrain and finetune.
struct RunArgs {
  fs::path corpus;
  fs::path out;
  fs::path config;
  fs::path metrics;
  fs::path resume;
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::size_t> history_turns;
  std::optional<double> corpus_fraction;
  std::size_t checkpoint_every = 0;
  bool quiet = false;
  // Pre-training ablation switches.
  std::optional<double> alpha;
  bool no_crs = false;

  void Register(CLI::App* app, bool ablations) {
    app->add_option("--corpus", corpus, "Corpus directory or manifest")->required();
    app->add_option("--out", out, "Checkpoint to write")->required();
    app->add_option("--config", config, "JSON training config (overrides --preset)");
    app->add_option("--preset", preset, "Built-in config");
    app->add_option("--metrics", metrics, "JSON-lines metrics log (appended)");
    app->add_option("--resume", resume, "Continue from this checkpoint");
    app->add_option("--seed", seed);
    app->add_option("--steps", steps);
    app->add_option("--batch-size", batch_size);
    app->add_option("--lr", lr, "Peak learning rate");
    app->add_option("--history-turns", history_turns, "k");
    app->add_option("--corpus-fraction", corpus_fraction);
    app->add_option("--checkpoint-every", checkpoint_every);
    app->add_flag("--quiet", quiet, "Print only the final record");
    if (ablations) {
      app->add_option("--alpha", alpha, "TPP loss weight (0 disables TPP)");
      app->add_flag("--no-crs", no_crs, "Disable cross-modal response selection");
    }
  }

  // Overrides apply to fresh runs; a resumed run keeps its stored config.
  bool HasOverrides() const {
    return seed || steps || batch_size || lr || history_turns || corpus_fraction || alpha ||
           no_crs || !config.empty();
  }

  void Apply(train::TrainConfig& c) const {
    if (seed) c.seed = *seed;
    if (steps) c.steps = *steps;
    if (batch_size) c.batch_size = *batch_size;
    if (lr) c.peak_lr = *lr;
    if (history_turns) c.history_turns = *history_turns;
    if (corpus_fraction) c.corpus_fraction = *corpus_fraction;
    if (alpha) c.objectives.weights.alpha = *alpha;
    if (no_crs) c.objectives.weights.use_crs = false;
    c.checkpoint_every = checkpoint_every;
  }

  template <typename Trainer>
  void Run(Trainer& t) const {
    std::optional<train::MetricsLog> log;
    if (!metrics.empty()) {
      // A fresh run starts a new log; only a resumed run extends one.
      if (resume.empty()) fs::remove(metrics);
      log.emplace(metrics);
    }
    train::RunOptions ro;
    ro.checkpoint_path = out;
    ro.metrics = log ? &*log : nullptr;
    train::MetricsRecord last;
    ro.on_step = [&](const train::MetricsRecord& r) {
      last = r;
      if (!quiet) std::cout << train::FormatMetrics(r) << "\n";
    };
    t.Run(ro);
    if (quiet) std::cout << train::FormatMetrics(last) << "\n";
  }
};

void CheckResumeArgs(const RunArgs& a) {
  if (!a.resume.empty() && (a.HasOverrides() || a.preset != "default")) {
    throw CLI::ValidationError("--resume", "a resumed run uses its stored config; drop overrides");
  }
}

int Generate(const fs::path& out, std::uint64_t seed, std::optional<std::size_t> num_dialogs,
             const std::string& preset, const fs::path& config, bool labels) {
  auto cfg = CorpusPreset(preset);
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw std::runtime_error("cannot open " + config.string());
    cfg = train::SyntheticConfigFromJson(nlohmann::json::parse(in));
  }
  if (num_dialogs) cfg.num_dialogs = *num_dialogs;
  const auto dialogs = corpus::GenerateSynthetic(cfg, seed);
  fs::create_directories(out);
  corpus::ShardWriteOptions opts;
  opts.max_turn_seconds = cfg.max_turn_seconds;
  const auto manifest = corpus::WriteShards(dialogs, out / "corpus.json", opts);
  std::size_t turns = 0;
  for (const auto& d : dialogs) turns += d.turns.size();
  if (labels) {
    const auto ex = finetune::LabelCrossModal(dialogs, cfg.vocab_size);
    finetune::WriteLabeledManifest(out / "labels.jsonl", ex);
  }
  std::ofstream(out / "synthetic.json") << train::ToJson(cfg).dump(2) << "\n";
  std::cout << nlohmann::json{{"dialogs", dialogs.size()},
                              {"turns", turns},
                              {"shards", manifest.shards.size()},
                              {"manifest", (out / "corpus.json").string()}}
                   .dump()
            << "\n";
  return 0;
}

int Pretrain(const RunArgs& a, bool diagnose) {
  CheckResumeArgs(a);
  auto dialogs = LoadDialogs(a.corpus);
  std::unique_ptr<train::Pretrainer> t;
  if (!a.resume.empty()) {
    t = std::make_unique<train::Pretrainer>(train::LoadCheckpoint(a.resume), std::move(dialogs));
  } else {
    auto cfg = a.config.empty() ? PretrainPreset(a.preset) : train::LoadTrainConfig(a.config);
    a.Apply(cfg);
    t = std::make_unique<train::Pretrainer>(cfg, std::move(dialogs));
  }
  a.Run(*t);
  if (diagnose) {
    const auto d = train::DiagnosePretrain(*t, 4, t->config().seed + 1);
    std::cout << nlohmann::json{{"tpp_mae", d.tpp_mae},
                                {"crs_accuracy", d.crs_accuracy},
                                {"examples", d.examples}}
                     .dump()
              << "\n";
  }
  return 0;
}

int Finetune(const RunArgs& a, const fs::path& labels, const fs::path& init, bool noise) {
  CheckResumeArgs(a);
  auto dialogs = LoadDialogs(a.corpus);
  auto examples = finetune::ReadLabeledManifest(labels);
  std::unique_ptr<train::Finetuner> t;
  if (!a.resume.empty()) {
    t = std::make_unique<train::Finetuner>(train::LoadCheckpoint(a.resume), std::move(dialogs),
                                           examples);
  } else {
    auto cfg = a.config.empty() ? FinetunePreset(a.preset) : train::LoadTrainConfig(a.config);
    a.Apply(cfg);
    if (noise) cfg.speech_noise = true;
    std::optional<train::Checkpoint> pre;
    if (!init.empty()) pre = train::LoadCheckpoint(init);
    t = std::make_unique<train::Finetuner>(cfg, std::move(dialogs), examples,
                                           pre ? &*pre : nullptr);
  }
  a.Run(*t);
  return 0;
}

int Evaluate(const fs::path& ckpt_path, const fs::path& corpus_path, const fs::path& labels) {
  const auto ckpt = train::LoadCheckpoint(ckpt_path);
  auto dialogs = LoadDialogs(corpus_path);
  if (ckpt.kind == "pretrain") {
    train::Pretrainer t(ckpt, std::move(dialogs));
    const auto d = train::DiagnosePretrain(t, 4, t.config().seed + 1);
    std::cout << nlohmann::json{{"kind", "pretrain"},
                                {"step", ckpt.step},
                                {"tpp_mae", d.tpp_mae},
                                {"crs_accuracy", d.crs_accuracy},
                                {"examples", d.examples}}
                     .dump()
              << "\n";
    return 0;
  }
  if (labels.empty()) throw CLI::ValidationError("--labels", "required for finetune checkpoints");
  const auto examples = finetune::ReadLabeledManifest(labels);
  train::Finetuner t(ckpt, std::move(dialogs), examples);
  const auto e = t.Evaluate(examples);
  std::cout << nlohmann::json{{"kind", "finetune"},
                              {"step", ckpt.step},
                              {t.config().task.metric_name(), e.metric},
                              {"examples", examples.size()}}
                   .dump()
            << "\n";
  return 0;
}

int SimulateMasking(std::size_t length, std::size_t trials, const std::string& masker,
                    std::uint64_t seed, std::size_t threads) {
  std::vector<std::pair<std::string, masking::AcousticMaskConfig>> which;
  if (masker == "span" || masker == "both") which.emplace_back("span", masking::AcousticMaskConfig{});
  if (masker == "baseline" || masker == "both") {
    which.emplace_back("baseline", masking::AcousticMaskConfig::Baseline());
  }
  for (const auto& [name, cfg] : which) {
    const auto e = masking::EstimateMaskRate(cfg, length, trials, seed, threads);
    std::printf("%s mean=%.6f stderr=%.6f trials=%zu length=%zu\n", name.c_str(), e.mean,
                e.std_error, e.trials, length);
  }
  return 0;
}

template <typename T>
model::AttentionExport ExportFor(const model::SpeechTextModel<T>& encoder, const text::Vocab& vocab,
                                 std::size_t max_text_length, const corpus::Sample& s,
                                 const fs::path& stem, const nlohmann::json& extra) {
  const text::WhitespaceTokenizer tok;
  const auto tokens = text::TokenizeSample(s, vocab, tok, max_text_length);
  model::TextInput input{tokens.token_ids, tokens.position_ids, tokens.segment_ids, {}};
  const auto out = encoder.Forward(input, encoder.ExtractFeatures(s.speech_prev),
                                   encoder.ExtractFeatures(s.speech_cur), nullptr, true);
  return model::ExportAttention(out.fused, stem, extra);
}

int ExportAttentionCmd(const fs::path& ckpt_path, const fs::path& corpus_path,
                       const std::string& dialog_id, std::size_t turn, const fs::path& stem) {
  const auto ckpt = train::LoadCheckpoint(ckpt_path);
  auto dialogs = LoadDialogs(corpus_path);
  const std::vector<finetune::LabeledExample> one = {{{dialog_id, turn}, 0.0}};
  const auto cfg = train::TrainConfigFromJson(ckpt.config);
  const auto sample = finetune::ResolveSamples(dialogs, one, cfg.history_turns).front();
  const nlohmann::json extra = {{"dialog_id", dialog_id}, {"turn", turn}, {"checkpoint_step", ckpt.step}};
  model::AttentionExport ex;
  if (ckpt.kind == "pretrain") {
    train::Pretrainer t(ckpt, std::move(dialogs));
    ex = ExportFor(t.model().encoder, t.vocab(), t.config().objectives.max_text_length, sample,
                   stem, extra);
  } else {
    const std::vector<finetune::LabeledExample> none = one;
    train::Finetuner t(ckpt, std::move(dialogs), none);
    ex = ExportFor(t.model().encoder, t.vocab(), t.config().objectives.max_text_length, sample,
                   stem, extra);
  }
  for (const auto& f : ex.files) std::cout << f.string() << "\n";
  std::cout << ex.metadata.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spoken-dialog speech-text pre-training toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus");
  std::uint64_t gen_seed = 0;
  std::optional<std::size_t> gen_dialogs;
  fs::path gen_out, gen_config;
  std::string gen_preset = "default";
  bool gen_labels = false;
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--num-dialogs", gen_dialogs);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--preset", gen_preset, "default|overfit|cross-modal");
  gen->add_option("--config", gen_config, "JSON synthetic-corpus config");
  gen->add_flag("--labels", gen_labels, "Also write cross-modal task labels");

  auto* pre = app.add_subcommand("pretrain", "Joint pre-training");
  RunArgs pre_args;
  bool pre_diagnose = false;
  pre_args.Register(pre, true);
  pre->add_flag("--diagnose", pre_diagnose, "Report TPP error and CRS accuracy at the end");

  auto* ft = app.add_subcommand("finetune", "Fine-tune with a prediction head");
  RunArgs ft_args;
  fs::path ft_labels, ft_init;
  bool ft_noise = false;
  ft_args.Register(ft, false);
  ft->add_option("--labels", ft_labels, "Labeled manifest")->required();
  ft->add_option("--init", ft_init, "Pre-training checkpoint");
  ft->add_flag("--speech-noise", ft_noise, "Replace all speech with noise (text-only control)");

  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint");
  fs::path ev_ckpt, ev_corpus, ev_labels;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--corpus", ev_corpus)->required();
  ev->add_option("--labels", ev_labels);

  auto* sim = app.add_subcommand("simulate-masking", "Monte Carlo masked fraction");
  std::size_t sim_length = 99, sim_trials = 1000000, sim_threads = 0;
  std::string sim_masker = "both";
  std::uint64_t sim_seed = 0;
  sim->add_option("--length", sim_length);
  sim->add_option("--trials", sim_trials);
  sim->add_option("--masker", sim_masker)->check(CLI::IsMember({"span", "baseline", "both"}));
  sim->add_option("--seed", sim_seed);
  sim->add_option("--threads", sim_threads, "Defaults to SPOKENDIAL_THREADS");

  auto* att = app.add_subcommand("export-attention", "Dump fusion attention for one sample");
  fs::path att_ckpt, att_corpus, att_out;
  std::string att_dialog;
  std::size_t att_turn = 2;
  att->add_option("--checkpoint", att_ckpt)->required();
  att->add_option("--corpus", att_corpus)->required();
  att->add_option("--dialog", att_dialog)->required();
  att->add_option("--turn", att_turn, "1-based current turn (>= 2)");
  att->add_option("--out", att_out, "Output stem")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return Generate(gen_out, gen_seed, gen_dialogs, gen_preset, gen_config, gen_labels);
    if (*pre) return Pretrain(pre_args, pre_diagnose);
    if (*ft) return Finetune(ft_args, ft_labels, ft_init, ft_noise);
    if (*ev) return Evaluate(ev_ckpt, ev_corpus, ev_labels);
    if (*sim) {
      return SimulateMasking(sim_length, sim_trials, sim_masker, sim_seed,
                             sim_threads ? sim_threads : train::ThreadsFromEnv());
    }
    if (*att) return ExportAttentionCmd(att_ckpt, att_corpus, att_dialog, att_turn, att_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
