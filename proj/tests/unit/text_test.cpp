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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "spokendial/corpus/sample.hpp"
#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/numerics/ops.hpp"
#include "spokendial/text/embedding.hpp"
#include "spokendial/text/token_masking.hpp"
#include "spokendial/text/tokenize.hpp"
#include "spokendial/text/vocab.hpp"

namespace spokendial::text {
namespace {

using corpus::Sample;
using corpus::SpeechTurn;
using corpus::TimedWord;

// Splits every word into chunks of two characters, so multi-token words
// exercise the boundary bookkeeping.
class PairTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> Split(const std::string& word) const override {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < word.size(); i += 2) out.push_back(word.substr(i, 2));
    return out;
  }
};

Sample MakeSample(std::vector<std::vector<std::string>> turns) {
  Sample s;
  s.dialog_id = "d";
  s.target_turn_index = turns.size();
  s.text_turns = std::move(turns);
  const auto& prev = s.text_turns[s.text_turns.size() - 2];
  const auto& cur = s.text_turns.back();
  for (std::size_t j = 0; j < prev.size(); ++j) {
    s.tpp_words.push_back({prev[j], 0.1 * j, 0.1 * j + 0.05, SpeechTurn::kPrevious, j});
  }
  for (std::size_t j = 0; j < cur.size(); ++j) {
    s.tpp_words.push_back({cur[j], 0.1 * j, 0.1 * j + 0.05, SpeechTurn::kCurrent, j});
  }
  s.prev_length = prev.size();
  s.cur_length = cur.size();
  return s;
}

Vocab VocabFor(const Sample& s, const Tokenizer& tok) {
  Vocab v;
  for (const auto& t : s.text_turns) {
    for (const auto& w : t) {
      for (const auto& p : tok.Split(w)) v.Add(p);
    }
  }
  return v;
}

TEST(VocabTest, SpecialsHaveFixedDistinctIds) {
  Vocab v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.Id("<s>"), Vocab::kBos);
  EXPECT_EQ(v.Id("<pad>"), Vocab::kPad);
  EXPECT_EQ(v.Id("</s>"), Vocab::kEos);
  EXPECT_EQ(v.Id("<mask>"), Vocab::kMask);
  EXPECT_EQ(v.Add("hello"), 4u);
  EXPECT_EQ(v.Add("hello"), 4u);
}

TEST(VocabTest, SaveLoadRoundTrip) {
  auto v = Vocab::FromTokens({"b", "a", "c"});
  const auto path = std::filesystem::temp_directory_path() / "spokendial_vocab_test.txt";
  v.Save(path);
  EXPECT_EQ(Vocab::Load(path), v);
  std::ofstream(path) << "a\nb\n";
  EXPECT_THROW(Vocab::Load(path), VocabError);
}

TEST(VocabTest, EveryCorpusWordMapsToATokenSequence) {
  corpus::SyntheticConfig cfg;
  auto dialogs = corpus::GenerateSynthetic(cfg, 4);
  PairTokenizer tok;
  auto vocab = BuildVocab(dialogs, tok);
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      for (const auto& w : t.words) {
        for (const auto& p : tok.Split(w.word)) EXPECT_TRUE(vocab.Find(p).has_value());
      }
    }
  }
}

TEST(TokenizeTest, TwoTurnsOfThreeWords) {
  auto s = MakeSample({{"a", "b", "c"}, {"d", "e", "f"}});
  WhitespaceTokenizer tok;
  auto in = TokenizeSample(s, VocabFor(s, tok), tok);
  ASSERT_EQ(in.size(), 9u);
  EXPECT_EQ(in.segment_ids, (std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(in.token_ids[0], Vocab::kBos);
  EXPECT_EQ(in.token_ids[4], Vocab::kEos);
  EXPECT_EQ(in.token_ids[8], Vocab::kEos);
  for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(in.position_ids[j], j);
}

TEST(TokenizeTest, SingleTokenWordHasEqualBoundaries) {
  auto s = MakeSample({{"a"}, {"b"}});
  WhitespaceTokenizer tok;
  auto in = TokenizeSample(s, VocabFor(s, tok), tok);
  ASSERT_EQ(in.word_boundaries.size(), 2u);
  EXPECT_EQ(in.word_boundaries[0].first_token, 1u);
  EXPECT_EQ(in.word_boundaries[0].last_token, 1u);
  EXPECT_EQ(in.word_boundaries[1].first_token, 3u);
  EXPECT_EQ(in.word_boundaries[1].last_token, 3u);
}

TEST(TokenizeTest, EightTurnsHaveEightSeparators) {
  std::vector<std::vector<std::string>> turns;
  for (int t = 0; t < 8; ++t) turns.push_back({"x" + std::to_string(t), "y"});
  auto s = MakeSample(turns);
  WhitespaceTokenizer tok;
  auto in = TokenizeSample(s, VocabFor(s, tok), tok);
  EXPECT_EQ(std::count(in.token_ids.begin(), in.token_ids.end(), Vocab::kEos), 8);
  EXPECT_EQ(std::count(in.token_ids.begin(), in.token_ids.end(), Vocab::kBos), 1);
}

TEST(TokenizeTest, MultiTokenWordsSpanTheirPieces) {
  auto s = MakeSample({{"abcde", "f"}, {"ghij", "klmnop"}});
  PairTokenizer tok;
  auto vocab = VocabFor(s, tok);
  auto in = TokenizeSample(s, vocab, tok);
  // <s> ab cd e f </s> gh ij kl mn op </s>
  ASSERT_EQ(in.size(), 12u);
  const std::vector<std::pair<std::size_t, std::size_t>> expected = {{1, 3}, {4, 4}, {6, 7}, {8, 10}};
  ASSERT_EQ(in.word_boundaries.size(), expected.size());
  for (std::size_t w = 0; w < expected.size(); ++w) {
    EXPECT_EQ(in.word_boundaries[w].first_token, expected[w].first);
    EXPECT_EQ(in.word_boundaries[w].last_token, expected[w].second);
  }
  EXPECT_EQ(std::count(in.segment_ids.begin(), in.segment_ids.end(), 1u), 5 + 1);
}

TEST(TokenizeTest, OutOfVocabularyNamesTheWord) {
  auto s = MakeSample({{"a"}, {"zebra"}});
  WhitespaceTokenizer tok;
  Vocab v = Vocab::FromTokens({"a"});
  try {
    TokenizeSample(s, v, tok);
    FAIL();
  } catch (const VocabError& e) {
    EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
  }
}

TEST(TokenizeTest, TruncationDropsOldestHistoryWhole) {
  auto s = MakeSample({{"a", "a", "a"}, {"b", "b"}, {"c"}, {"d", "d"}});
  WhitespaceTokenizer tok;
  auto v = VocabFor(s, tok);
  // Full length 1 + 4 + 3 + 2 + 3 = 13.
  EXPECT_EQ(TokenizeSample(s, v, tok, 13).dropped_turns, 0u);
  auto cut = TokenizeSample(s, v, tok, 12);
  EXPECT_EQ(cut.dropped_turns, 1u);
  EXPECT_EQ(cut.size(), 9u);
  EXPECT_EQ(cut.token_ids[1], v.Id("b"));
  EXPECT_EQ(TokenizeSample(s, v, tok, 6).dropped_turns, 2u);
  EXPECT_THROW(TokenizeSample(s, v, tok, 5), TruncationError);
}

// Layout, segment and boundary invariants over synthetic samples with both
// tokenizers and a range of history limits.
TEST(TokenizeTest, LayoutInvariantsHold) {
  corpus::SyntheticConfig cfg;
  cfg.num_dialogs = 10;
  auto dialogs = corpus::GenerateSynthetic(cfg, 8);
  WhitespaceTokenizer ws;
  PairTokenizer pairs;
  for (const Tokenizer* tok : std::initializer_list<const Tokenizer*>{&ws, &pairs}) {
    auto vocab = BuildVocab(dialogs, *tok);
    for (std::size_t k = 1; k <= 7; k += 3) {
      for (const auto& d : dialogs) {
        for (const auto& s : corpus::BuildSamples(d, k)) {
          auto in = TokenizeSample(s, vocab, *tok);
          const std::size_t n = in.size();
          ASSERT_EQ(in.turns.size(), s.text_turns.size());
          EXPECT_EQ(in.token_ids.front(), Vocab::kBos);
          EXPECT_EQ(in.token_ids.back(), Vocab::kEos);
          for (const auto& span : in.turns) EXPECT_EQ(in.token_ids[span.end], Vocab::kEos);
          const auto& cur = in.turns.back();
          std::size_t seg1 = std::count(in.segment_ids.begin(), in.segment_ids.end(), 1u);
          EXPECT_EQ(seg1, cur.end - cur.begin + 1);
          for (std::size_t j = cur.begin; j < n; ++j) EXPECT_EQ(in.segment_ids[j], 1u);
          ASSERT_EQ(in.word_boundaries.size(), s.tpp_words.size());
          const auto& prev = in.turns[in.turns.size() - 2];
          for (std::size_t w = 0; w < s.tpp_words.size(); ++w) {
            const auto& b = in.word_boundaries[w];
            const auto& span = b.turn == SpeechTurn::kPrevious ? prev : cur;
            EXPECT_LE(b.first_token, b.last_token);
            EXPECT_GE(b.first_token, span.begin);
            EXPECT_LT(b.last_token, span.end);
            EXPECT_EQ(b.start_time, s.tpp_words[w].start_time);
            EXPECT_EQ(b.turn, s.tpp_words[w].turn);
          }
        }
      }
    }
  }
}

TEST(EmbedTextTest, ZeroTablesGiveZeroOutput) {
  std::mt19937_64 rng(0);
  TextEmbedding<double> emb(10, 16, 4, rng);
  for (auto* p : emb.Parameters()) p->mutable_value().Fill(0.0);
  std::vector<std::size_t> ids = {0, 5, 7}, pos = {0, 1, 2}, seg = {0, 0, 1};
  auto out = emb.Embed(ids, pos, seg).value();
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(EmbedTextTest, RowsAreTheThreeWaySum) {
  std::mt19937_64 rng(1);
  TextEmbedding<double> emb(10, 16, 4, rng);
  std::vector<std::size_t> ids = {4, 4, 9}, pos = {0, 1, 2}, seg = {0, 1, 1};
  auto out = emb.Embed(ids, pos, seg).value();
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double expect = emb.token().value()(ids[j], c) + emb.position().value()(pos[j], c) +
                            emb.segment().value()(seg[j], c);
      EXPECT_DOUBLE_EQ(out(j, c), expect);
    }
  }
}

TEST(EmbedTextTest, SegmentDifferenceIsExact) {
  std::mt19937_64 rng(2);
  TextEmbedding<double> emb(10, 16, 4, rng);
  std::vector<std::size_t> ids = {6, 6}, pos = {3, 3}, seg = {0, 1};
  auto out = emb.Embed(ids, pos, seg).value();
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(out(1, c) - out(0, c),
                emb.segment().value()(1, c) - emb.segment().value()(0, c), 1e-15);
  }
}

TEST(EmbedTextTest, PermutingTokensKeepsPositionContribution) {
  std::mt19937_64 rng(3);
  TextEmbedding<double> emb(10, 16, 4, rng);
  std::vector<std::size_t> pos = {0, 1}, seg = {0, 0};
  std::vector<std::size_t> ab = {5, 8}, ba = {8, 5};
  auto x = emb.Embed(ab, pos, seg).value();
  auto y = emb.Embed(ba, pos, seg).value();
  for (std::size_t c = 0; c < 4; ++c) {
    // Row 0 of y minus row 1 of x removes the token term and leaves the
    // position difference.
    EXPECT_NEAR(y(0, c) - x(1, c), emb.position().value()(0, c) - emb.position().value()(1, c),
                1e-15);
  }
}

TEST(EmbedTextTest, OverLimitIsATruncationError) {
  std::mt19937_64 rng(4);
  TextEmbedding<float> emb(10, 4, 4, rng);
  std::vector<std::size_t> ids(5, 4), pos = {0, 1, 2, 3, 4}, seg(5, 0);
  EXPECT_THROW(emb.Embed(ids, pos, seg), TruncationError);
}

std::vector<std::size_t> RegularTokens(std::size_t n, std::size_t vocab, std::mt19937_64& rng) {
  std::vector<std::size_t> ids(n);
  for (auto& id : ids) {
    id = std::uniform_int_distribution<std::size_t>(Vocab::kNumSpecials, vocab - 1)(rng);
  }
  return ids;
}

TEST(MaskTokensTest, ZeroProbabilityIsEmpty) {
  std::mt19937_64 rng(0);
  auto ids = RegularTokens(1000, 20, rng);
  TokenMaskConfig cfg;
  cfg.probability = 0.0;
  EXPECT_TRUE(MaskTokens(ids, 20, rng, cfg).empty());
}

TEST(MaskTokensTest, SelectionRateMatchesBernoulli) {
  std::mt19937_64 rng(10);
  auto ids = RegularTokens(100000, 50, rng);
  auto plan = MaskTokens(ids, 50, rng);
  const double rate = static_cast<double>(plan.size()) / ids.size();
  EXPECT_NEAR(rate, 0.15, 0.005);
}

TEST(MaskTokensTest, CorruptionSplitIs80_10_10) {
  std::mt19937_64 rng(11);
  std::size_t counts[3] = {0, 0, 0};
  std::size_t total = 0;
  while (total < 100000) {
    auto ids = RegularTokens(10000, 50, rng);
    auto plan = MaskTokens(ids, 50, rng);
    for (auto a : plan.actions) ++counts[static_cast<int>(a)];
    total += plan.size();
  }
  EXPECT_NEAR(static_cast<double>(counts[0]) / total, 0.8, 0.01);
  EXPECT_NEAR(static_cast<double>(counts[1]) / total, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(counts[2]) / total, 0.1, 0.01);
}

TEST(MaskTokensTest, SpecialsNeverSelectedAndLabelsExact) {
  std::mt19937_64 rng(12);
  std::vector<std::size_t> ids;
  for (int i = 0; i < 5000; ++i) ids.push_back(i % 8);  // half specials
  TokenMaskConfig cfg;
  cfg.probability = 0.9;
  auto plan = MaskTokens(ids, 8, rng, cfg);
  auto corrupted = ApplyTextMask(ids, plan);
  std::vector<bool> selected(ids.size(), false);
  for (std::size_t m = 0; m < plan.size(); ++m) {
    const auto j = plan.positions[m];
    selected[j] = true;
    EXPECT_FALSE(Vocab::IsSpecial(ids[j]));
    EXPECT_EQ(plan.labels[m], ids[j]);
    switch (plan.actions[m]) {
      case Corruption::kMaskToken:
        EXPECT_EQ(corrupted[j], Vocab::kMask);
        break;
      case Corruption::kRandomToken:
        EXPECT_FALSE(Vocab::IsSpecial(corrupted[j]));
        break;
      case Corruption::kKeep:
        EXPECT_EQ(corrupted[j], ids[j]);
        break;
    }
  }
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (!selected[j]) EXPECT_EQ(corrupted[j], ids[j]);
  }
}

TEST(MaskTokensTest, PlanIsPureFunctionOfRngState) {
  std::mt19937_64 gen(13);
  auto ids = RegularTokens(2000, 30, gen);
  std::mt19937_64 a(99), b(99);
  auto pa = MaskTokens(ids, 30, a);
  auto pb = MaskTokens(ids, 30, b);
  EXPECT_EQ(pa.positions, pb.positions);
  EXPECT_EQ(pa.replacements, pb.replacements);
}

}  // namespace
}  // namespace spokendial::text
