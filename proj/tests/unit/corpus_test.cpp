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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "spokendial/corpus/dialog.hpp"
#include "spokendial/corpus/sample.hpp"
#include "spokendial/corpus/shards.hpp"
#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::corpus {
namespace {

namespace fs = std::filesystem;

Turn MakeTurn(std::size_t index, std::vector<WordAlignment> words, std::size_t samples = 300) {
  Turn t;
  t.turn_index = index;
  t.sample_rate = 100.0;
  t.waveform.assign(samples, 0.0f);
  t.words = std::move(words);
  return t;
}

Dialog MakeDialog(std::size_t n) {
  Dialog d;
  d.dialog_id = "dlg";
  for (std::size_t i = 1; i <= n; ++i) {
    d.turns.push_back(MakeTurn(i, {{"a" + std::to_string(i), 0.1, 0.4},
                                   {"b" + std::to_string(i), 0.5, 0.9}}));
  }
  return d;
}

fs::path TempDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("spokendial_corpus_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(ValidateAlignmentTest, MonotoneNonOverlappingIsOk) {
  auto t = MakeTurn(1, {{"x", 0.0, 0.5}, {"y", 0.5, 1.0}, {"z", 1.2, 3.0}});
  EXPECT_TRUE(ValidateAlignment(t).empty());
}

TEST(ValidateAlignmentTest, EndPastDuration) {
  auto t = MakeTurn(1, {{"x", 0.0, 0.5}, {"y", 2.5, 3.5}});
  auto v = ValidateAlignment(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].word_index, 1u);
  EXPECT_NE(v[0].message.find("exceeds duration"), std::string::npos);
}

TEST(ValidateAlignmentTest, Overlap) {
  auto t = MakeTurn(1, {{"x", 0.0, 0.6}, {"y", 0.5, 1.0}});
  auto v = ValidateAlignment(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "overlap at 0, 1");
}

TEST(ValidateAlignmentTest, TurnLevelViolations) {
  auto empty = MakeTurn(1, {});
  EXPECT_FALSE(ValidateAlignment(empty).empty());
  auto longer = MakeTurn(1, {{"x", 0.0, 0.5}}, 1200);
  EXPECT_FALSE(ValidateAlignment(longer, 10.0).empty());
}

TEST(BuildSamplesTest, EightTurnsWithFullHistory) {
  auto samples = BuildSamples(MakeDialog(8), 7);
  ASSERT_EQ(samples.size(), 7u);
  const auto& last = samples.back();
  EXPECT_EQ(last.target_turn_index, 8u);
  EXPECT_EQ(last.text_turns.size(), 8u);
  const auto& first = samples.front();
  EXPECT_EQ(first.target_turn_index, 2u);
  EXPECT_EQ(first.text_turns.size(), 2u);
}

TEST(BuildSamplesTest, TextTurnCountFollowsHistoryLimit) {
  for (std::size_t n = 0; n <= 9; ++n) {
    for (std::size_t k = 1; k <= 8; ++k) {
      auto samples = BuildSamples(MakeDialog(n), k);
      ASSERT_EQ(samples.size(), n >= 2 ? n - 1 : 0u);
      for (const auto& s : samples) {
        const std::size_t i = s.target_turn_index;
        EXPECT_EQ(s.text_turns.size(), std::min(k, i - 1) + 1);
        // The last two text turns are t_{i-1} and t_i.
        EXPECT_EQ(s.text_turns.back()[0], "a" + std::to_string(i));
        EXPECT_EQ(s.text_turns[s.text_turns.size() - 2][0], "a" + std::to_string(i - 1));
      }
    }
  }
}

TEST(BuildSamplesTest, SpeechAndTimedWordsComeFromLastTwoTurns) {
  SyntheticConfig cfg;
  cfg.num_dialogs = 6;
  auto dialogs = GenerateSynthetic(cfg, 3);
  for (const auto& d : dialogs) {
    for (const auto& s : BuildSamples(d, 3)) {
      const Turn& prev = d.turns[s.target_turn_index - 2];
      const Turn& cur = d.turns[s.target_turn_index - 1];
      EXPECT_EQ(s.speech_prev, prev.waveform);
      EXPECT_EQ(s.speech_cur, cur.waveform);
      ASSERT_EQ(s.tpp_words.size(), prev.word_count() + cur.word_count());
      EXPECT_EQ(s.prev_length, prev.word_count());
      EXPECT_EQ(s.cur_length, cur.word_count());
      for (std::size_t j = 0; j < s.tpp_words.size(); ++j) {
        const auto& tw = s.tpp_words[j];
        const Turn& src = tw.turn == SpeechTurn::kPrevious ? prev : cur;
        ASSERT_LT(tw.word_index, src.words.size());
        EXPECT_EQ(tw.word, src.words[tw.word_index].word);
        EXPECT_EQ(tw.start_time, src.words[tw.word_index].start_time);
        EXPECT_LE(tw.end_time, src.duration());
      }
    }
  }
}

TEST(BuildSamplesTest, InvalidAlignmentNamesDialogAndTurn) {
  auto d = MakeDialog(3);
  d.turns[1].words[1].end_time = 99.0;
  try {
    BuildSamples(d, 2);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'dlg' turn 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(BuildSamples(MakeDialog(3), 0), std::invalid_argument);
}

TEST(SyntheticTest, SameSeedIsIdentical) {
  SyntheticConfig cfg;
  cfg.noise_std = 0.1;
  EXPECT_EQ(GenerateSynthetic(cfg, 0), GenerateSynthetic(cfg, 0));
  EXPECT_NE(GenerateSynthetic(cfg, 0), GenerateSynthetic(cfg, 1));
}

TEST(SyntheticTest, NoiselessWordsExactlyCoverTheirSignature) {
  SyntheticConfig cfg;
  cfg.num_dialogs = 8;
  cfg.tone_amplitude = 0.0;
  for (const auto& d : GenerateSynthetic(cfg, 11)) {
    for (const auto& t : d.turns) {
      EXPECT_TRUE(ValidateAlignment(t).empty());
      std::vector<bool> inside(t.waveform.size(), false);
      for (const auto& w : t.words) {
        const auto sig = WordSignature(SyntheticWordId(w.word), cfg.period);
        const auto b = static_cast<std::size_t>(std::llround(w.start_time * cfg.frame_rate));
        const auto e = static_cast<std::size_t>(std::llround(w.end_time * cfg.frame_rate));
        for (std::size_t s = b; s < e; ++s) {
          EXPECT_EQ(t.waveform[s], sig[(s - b) % cfg.period]);
          inside[s] = true;
        }
      }
      for (std::size_t s = 0; s < inside.size(); ++s) {
        if (!inside[s]) EXPECT_EQ(t.waveform[s], 0.0f);
      }
    }
  }
}

TEST(SyntheticTest, LongTurnsAreTruncatedAtWordBoundary) {
  SyntheticConfig cfg;
  cfg.min_words = cfg.max_words = 40;
  cfg.max_turn_seconds = 3.0;
  cfg.num_dialogs = 4;
  for (const auto& d : GenerateSynthetic(cfg, 5)) {
    for (const auto& t : d.turns) {
      EXPECT_LE(t.duration(), 3.0);
      EXPECT_LT(t.word_count(), 40u);
      EXPECT_TRUE(ValidateAlignment(t, 3.0).empty());
    }
  }
}

TEST(SyntheticTest, ConfigPreconditions) {
  SyntheticConfig cfg;
  cfg.vocab_size = 7;
  EXPECT_THROW(GenerateSynthetic(cfg, 0), std::invalid_argument);
  cfg = {};
  cfg.frame_rate = 5.0;
  EXPECT_THROW(GenerateSynthetic(cfg, 0), std::invalid_argument);
}

// Oracle frame features are the raw period-aligned windows. A softmax-linear
// probe trained on them must recover the word identity when noise is off.
TEST(SyntheticTest, TopicLimitsWordsPerDialog) {
  SyntheticConfig cfg;
  cfg.num_dialogs = 12;
  cfg.min_turns = cfg.max_turns = 6;
  cfg.vocab_size = 40;
  cfg.topic_size = 4;
  std::set<std::size_t> overall;
  for (const auto& d : GenerateSynthetic(cfg, 3)) {
    std::set<std::size_t> ids;
    for (const auto& t : d.turns) {
      for (const auto& w : t.words) ids.insert(SyntheticWordId(w.word));
    }
    EXPECT_LE(ids.size(), 4u) << d.dialog_id;
    overall.insert(ids.begin(), ids.end());
  }
  // Topics differ between dialogs.
  EXPECT_GT(overall.size(), 4u);

  cfg.topic_size = 41;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

TEST(SyntheticTest, LinearProbeRecoversWordIdentity) {
  using numerics::Tensor;
  using numerics::Var;
  SyntheticConfig cfg;
  cfg.num_dialogs = 12;
  cfg.vocab_size = 24;
  cfg.tone_amplitude = 0.0;
  auto dialogs = GenerateSynthetic(cfg, 21);

  std::vector<std::vector<double>> feats;
  std::vector<std::size_t> labels;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      for (const auto& w : t.words) {
        const auto b = static_cast<std::size_t>(std::llround(w.start_time * cfg.frame_rate));
        const auto e = static_cast<std::size_t>(std::llround(w.end_time * cfg.frame_rate));
        for (std::size_t s = b; s + cfg.period <= e; s += cfg.period) {
          feats.emplace_back(t.waveform.begin() + s, t.waveform.begin() + s + cfg.period);
          labels.push_back(SyntheticWordId(w.word));
        }
      }
    }
  }
  ASSERT_GT(labels.size(), 200u);
  Tensor<double> x = Tensor<double>::Zeros(feats.size(), cfg.period);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    for (std::size_t c = 0; c < cfg.period; ++c) x(i, c) = feats[i][c];
  }
  auto xv = Var<double>::Constant(x);
  numerics::Parameter<double> w("w", Tensor<double>::Zeros(cfg.period, cfg.vocab_size));
  numerics::Parameter<double> b("b", Tensor<double>::Zeros(1, cfg.vocab_size));
  for (int step = 0; step < 1500; ++step) {
    w.ZeroGrad();
    b.ZeroGrad();
    auto loss = numerics::CrossEntropy(numerics::AddRow(numerics::MatMul(xv, w.var()), b.var()),
                                       std::span<const std::size_t>(labels));
    numerics::Backward(loss);
    for (auto* p : {&w, &b}) {
      for (std::size_t i = 0; i < p->value().size(); ++i) {
        p->mutable_value()[i] -= 2.0 * p->grad()[i];
      }
    }
  }
  auto logits = numerics::AddRow(numerics::MatMul(xv, w.var()), b.var()).value();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += best == labels[i];
  }
  EXPECT_GT(static_cast<double>(correct) / labels.size(), 0.99);
}

TEST(ShardsTest, RoundTripIsBitIdentical) {
  SyntheticConfig cfg;
  cfg.num_dialogs = 10;
  cfg.noise_std = 0.3;
  auto dialogs = GenerateSynthetic(cfg, 1);
  auto dir = TempDir("roundtrip");
  ShardWriteOptions opts;
  opts.dialogs_per_shard = 3;
  auto manifest = WriteShards(dialogs, dir / "corpus.json", opts);
  EXPECT_EQ(manifest.shards.size(), 4u);
  auto loaded = LoadCorpus(dir / "corpus.json");
  EXPECT_EQ(loaded.dialogs, dialogs);
}

TEST(ShardsTest, UnknownVersionIsRejected) {
  auto dir = TempDir("version");
  WriteShards(GenerateSynthetic(SyntheticConfig{}, 2), dir / "corpus.json");
  std::ifstream in(dir / "corpus.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto at = text.find("\"version\": 1");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 12, "\"version\": 7");
  std::ofstream(dir / "corpus.json") << text;
  try {
    LoadCorpus(dir / "corpus.json");
    FAIL();
  } catch (const CorpusFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version 7"), std::string::npos);
  }
}

TEST(ShardsTest, TruncatedShardFailsWholeLoad) {
  auto dir = TempDir("truncated");
  auto manifest = WriteShards(GenerateSynthetic(SyntheticConfig{}, 2), dir / "corpus.json");
  const auto shard = dir / manifest.shards[0].file;
  fs::resize_file(shard, fs::file_size(shard) - 1);
  EXPECT_THROW(LoadCorpus(dir / "corpus.json"), CorpusFormatError);
}

TEST(ShardsTest, CorruptedByteFailsChecksum) {
  auto dir = TempDir("checksum");
  auto manifest = WriteShards(GenerateSynthetic(SyntheticConfig{}, 2), dir / "corpus.json");
  const auto shard = dir / manifest.shards[0].file;
  std::fstream f(shard, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(17);
  f.put('\x5a');
  f.close();
  try {
    LoadCorpus(dir / "corpus.json");
    FAIL();
  } catch (const CorpusFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

}  // namespace
}  // namespace spokendial::corpus
