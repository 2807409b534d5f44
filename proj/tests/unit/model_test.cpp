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
#include <sstream>

#include "spokendial/model/attention_export.hpp"
#include "spokendial/model/encoders.hpp"
#include "spokendial/model/model.hpp"
#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"
#include "spokendial/speech/frontend.hpp"

namespace spokendial::model {
namespace {

using numerics::Tensor;
using numerics::Var;
using Vd = Var<double>;

EncoderConfig Small(std::size_t layers = 2) {
  EncoderConfig c;
  c.num_layers = layers;
  c.hidden = 8;
  c.num_heads = 2;
  c.ffn_dim = 16;
  c.pos_conv_kernel = 5;
  c.pos_conv_groups = 2;
  return c;
}

Vd RandomRows(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return Vd::Constant(numerics::RandomNormal<double>(rows, cols, 1.0, rng));
}

// Appends `pad` rows of junk to x.
Vd Padded(const Vd& x, std::size_t pad, std::mt19937_64& rng) {
  const Vd parts[] = {x, RandomRows(pad, x.cols(), rng)};
  return numerics::ConcatRows<double>(parts);
}

KeyMask ValidPrefix(std::size_t real, std::size_t pad) {
  KeyMask m(real + pad, 0);
  std::fill(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(real), 1);
  return m;
}

void ExpectRowsNear(const Tensor<double>& a, std::size_t a_begin, const Tensor<double>& b,
                    std::size_t b_begin, std::size_t rows, double tol) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      ASSERT_NEAR(a(a_begin + r, c), b(b_begin + r, c), tol) << "row " << r << " col " << c;
    }
  }
}

TEST(TextEncoderTest, ZeroLayersIsIdentity) {
  std::mt19937_64 rng(0);
  TextEncoder<double> enc(Small(0), rng);
  auto x = RandomRows(7, 8, rng);
  EXPECT_EQ(enc.Forward(x).value(), x.value());
}

TEST(TextEncoderTest, ShapePreservedForRandomLengths) {
  std::mt19937_64 rng(1);
  TextEncoder<double> enc(Small(), rng);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    auto y = enc.Forward(RandomRows(n, 8, rng));
    EXPECT_EQ(y.rows(), n);
    EXPECT_EQ(y.cols(), 8u);
  }
}

TEST(TextEncoderTest, PaddingInvariance) {
  std::mt19937_64 rng(2);
  TextEncoder<double> enc(Small(), rng);
  auto x = RandomRows(9, 8, rng);
  auto plain = enc.Forward(x).value();
  auto padded = enc.Forward(Padded(x, 5, rng), ValidPrefix(9, 5)).value();
  ExpectRowsNear(plain, 0, padded, 0, 9, 1e-5);
}

TEST(SpeechEncoderTest, PaddingInvariance) {
  std::mt19937_64 rng(3);
  SpeechEncoder<double> enc(Small(), rng);
  auto a = RandomRows(12, 8, rng);
  auto plain = enc.Forward(a).value();
  auto padded = enc.Forward(Padded(a, 6, rng), ValidPrefix(12, 6)).value();
  ExpectRowsNear(plain, 0, padded, 0, 12, 1e-5);
}

TEST(SpeechEncoderTest, ZeroPositionalConvReducesToPlainStack) {
  std::mt19937_64 rng(4);
  auto cfg = Small();
  SpeechEncoder<double> speech(cfg, rng);
  speech.positional().weight().mutable_value().Fill(0.0);
  auto x = RandomRows(10, 8, rng);
  EXPECT_EQ(speech.positional().Forward(x).value(), x.value());

  // The same stack without the positional layer: copy the stack parameters
  // into a text encoder of the same shape.
  std::mt19937_64 other(5);
  TextEncoder<double> plain(cfg, other);
  auto src = speech.Parameters();
  auto dst = plain.Parameters();
  ASSERT_EQ(src.size(), dst.size() + 2);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->mutable_value() = src[i + 2]->value();
  EXPECT_EQ(speech.Forward(x).value(), plain.Forward(x).value());
}

TEST(SpeechEncoderTest, PositionalConvIsShiftEquivariantAwayFromEdges) {
  std::mt19937_64 rng(6);
  ConvPositionalEmbedding<double> pos(8, 5, 2, rng, "p");
  const std::size_t len = 30, shift = 4, half = 2;
  auto x = numerics::RandomNormal<double>(len + shift, 8, 1.0, rng);
  Tensor<double> shifted({len + shift, 8});
  for (std::size_t r = 0; r < len; ++r) {
    for (std::size_t c = 0; c < 8; ++c) shifted(r + shift, c) = x(r, c);
  }
  auto a = pos.Forward(Vd::Constant(x)).value();
  auto b = pos.Forward(Vd::Constant(shifted)).value();
  for (std::size_t r = half; r + half < len; ++r) {
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(a(r, c), b(r + shift, c), 1e-12);
  }
}

TEST(FusionTest, LengthIdentityForRandomTriples) {
  std::mt19937_64 rng(7);
  auto cfg = Small(1);
  FusionModule<double> fusion(cfg, true, rng);
  auto cls = RandomRows(1, 8, rng), sep = RandomRows(1, 8, rng);
  auto draw = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = draw(1, 12), mp = draw(1, 8), mc = draw(1, 8);
    auto seq = speech::AssembleSpeechSequence(RandomRows(mp, 8, rng), RandomRows(mc, 8, rng), cls, sep);
    auto fused = fusion.Forward(RandomRows(n, 8, rng), seq.features);
    ASSERT_EQ(fused.hidden.rows(), n + mp + mc + 2);
    ASSERT_EQ(fused.size(), n + mp + mc + 2);
    ASSERT_EQ(fused.speech_begin(), n);
  }
}

TEST(FusionTest, ModalityEmbeddingDifference) {
  std::mt19937_64 rng(8);
  FusionModule<double> fusion(Small(1), true, rng);
  auto row = RandomRows(1, 8, rng);
  auto combined = fusion.Combine(row, row).value();
  const auto& m = fusion.modality().value();
  for (std::size_t c = 0; c < 8; ++c) {
    EXPECT_NEAR(combined(1, c) - combined(0, c), m(1, c) - m(0, c), 1e-15);
  }
}

TEST(FusionTest, AttentionRowsSumToOneOverValidColumns) {
  std::mt19937_64 rng(9);
  FusionModule<double> fusion(Small(1), true, rng);
  auto text = RandomRows(6, 8, rng), speech = RandomRows(9, 8, rng);
  KeyMask text_valid = {1, 1, 1, 1, 0, 0};
  auto fused = fusion.Forward(text, speech, text_valid, {}, nullptr, true);
  ASSERT_TRUE(fused.attention.has_value());
  ASSERT_EQ(fused.attention->heads.size(), 2u);
  for (const auto& head : fused.attention->heads) {
    ASSERT_EQ(head.rows(), 15u);
    ASSERT_EQ(head.cols(), 15u);
    for (std::size_t r = 0; r < 15; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 15; ++c) total += head(r, c);
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_EQ(head(r, 4), 0.0);
      EXPECT_EQ(head(r, 5), 0.0);
    }
  }
}

TEST(FusionTest, PaddingInvarianceWithTextPads) {
  std::mt19937_64 rng(10);
  FusionModule<double> fusion(Small(1), true, rng);
  auto text = RandomRows(5, 8, rng), speech = RandomRows(7, 8, rng);
  auto plain = fusion.Forward(text, speech).hidden.value();
  auto padded = fusion.Forward(Padded(text, 3, rng), Padded(speech, 2, rng), ValidPrefix(5, 3),
                               ValidPrefix(7, 2))
                    .hidden.value();
  ExpectRowsNear(plain, 0, padded, 0, 5, 1e-5);
  ExpectRowsNear(plain, 5, padded, 8, 7, 1e-5);
}

TEST(FusionTest, AttentionOnlyVariantHasFewerParameters) {
  std::mt19937_64 rng(11);
  FusionModule<double> full(Small(1), true, rng);
  FusionModule<double> attn_only(Small(1), false, rng);
  EXPECT_EQ(full.Parameters().size(), attn_only.Parameters().size() + 6);
}

std::vector<std::vector<double>> ReadCsv(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

TEST(AttentionExportTest, WritesMatrixAndCrossModalMass) {
  std::mt19937_64 rng(12);
  FusionModule<double> fusion(Small(1), true, rng);
  auto fused = fusion.Forward(RandomRows(4, 8, rng), RandomRows(6, 8, rng), {}, {}, nullptr, true);
  const auto dir = std::filesystem::temp_directory_path() / "spokendial_attention_test";
  std::filesystem::remove_all(dir);
  auto exported = ExportAttention(fused, dir / "attn", {{"sample", "x"}});
  ASSERT_EQ(exported.files.size(), 4u);  // average, two heads, metadata
  auto avg = ReadCsv(dir / "attn.csv");
  ASSERT_EQ(avg.size(), 10u);
  double mass = 0;
  for (std::size_t r = 0; r < 10; ++r) {
    ASSERT_EQ(avg[r].size(), 10u);
    double total = 0;
    for (double v : avg[r]) total += v;
    EXPECT_NEAR(total, 1.0, 1e-5);
    if (r < 4) {
      for (std::size_t c = 4; c < 10; ++c) mass += avg[r][c];
    }
  }
  EXPECT_NEAR(exported.metadata["cross_modal_mass"].get<double>(), mass / 4, 1e-6);
  EXPECT_EQ(exported.metadata["speech_span"][0].get<std::size_t>(), 4u);
  EXPECT_EQ(exported.metadata["sample"], "x");
  EXPECT_TRUE(std::filesystem::exists(dir / "attn.json"));
}

TEST(AttentionExportTest, RequiresCapture) {
  std::mt19937_64 rng(13);
  FusionModule<double> fusion(Small(1), true, rng);
  auto fused = fusion.Forward(RandomRows(2, 8, rng), RandomRows(3, 8, rng));
  EXPECT_THROW(ExportAttention(fused, std::filesystem::temp_directory_path() / "x"),
               CaptureNotEnabledError);
}

ModelConfig TinyModel() {
  ModelConfig c;
  c.vocab_size = 12;
  c.max_text_length = 32;
  c.frontend.layers = {{6, 5, 5}, {6, 2, 2}};
  c.frontend.hidden = 8;
  c.text = c.speech = c.fusion = Small(1);
  return c;
}

TEST(SpeechTextModelTest, ForwardLengthsAndRowMapping) {
  SpeechTextModel<double> model(TinyModel(), 3);
  std::vector<std::size_t> ids = {0, 5, 6, 2, 7, 2}, pos = {0, 1, 2, 3, 4, 5},
                           seg = {0, 0, 0, 0, 1, 1};
  std::vector<float> w1(50, 0.1f), w2(70, -0.2f);
  auto out = model.Forward({ids, pos, seg, {}}, model.ExtractFeatures(w1),
                           model.ExtractFeatures(w2));
  EXPECT_EQ(out.prev_frames, 5u);
  EXPECT_EQ(out.cur_frames, 7u);
  EXPECT_EQ(out.fused.hidden.rows(), 6u + 5 + 7 + 2);
  EXPECT_EQ(out.CLSRow(), 6u);
  EXPECT_EQ(out.PrevFrameRow(0), 7u);
  EXPECT_EQ(out.SEPRow(), 12u);
  EXPECT_EQ(out.CurFrameRow(6), 19u);
}

TEST(SpeechTextModelTest, DeterministicWithoutDropoutAndSeeded) {
  auto cfg = TinyModel();
  cfg.text.dropout = cfg.speech.dropout = cfg.fusion.dropout = 0.1;
  SpeechTextModel<double> a(cfg, 4), b(cfg, 4);
  std::vector<std::size_t> ids = {0, 5, 2, 7, 2}, pos = {0, 1, 2, 3, 4}, seg = {0, 0, 0, 1, 1};
  std::vector<float> w(40, 0.3f);
  auto fa = a.ExtractFeatures(w), fb = b.ExtractFeatures(w);
  EXPECT_EQ(a.Forward({ids, pos, seg, {}}, fa, fa).fused.hidden.value(),
            b.Forward({ids, pos, seg, {}}, fb, fb).fused.hidden.value());
  std::mt19937_64 r1(1), r2(1), r3(2);
  auto d1 = a.Forward({ids, pos, seg, {}}, fa, fa, &r1).fused.hidden.value();
  auto d2 = a.Forward({ids, pos, seg, {}}, fa, fa, &r2).fused.hidden.value();
  auto d3 = a.Forward({ids, pos, seg, {}}, fa, fa, &r3).fused.hidden.value();
  EXPECT_EQ(d1, d2);
  EXPECT_FALSE(d1 == d3);
}

TEST(SpeechTextModelTest, MismatchedHiddenRejected) {
  auto cfg = TinyModel();
  cfg.frontend.hidden = 16;
  EXPECT_THROW(SpeechTextModel<double>(cfg, 0), std::invalid_argument);
}

TEST(SpeechTextModelTest, ConfigJsonRoundTrip) {
  auto cfg = TinyModel();
  nlohmann::json j = cfg;
  auto back = j.get<ModelConfig>();
  EXPECT_EQ(back.frontend, cfg.frontend);
  EXPECT_EQ(back.text, cfg.text);
  EXPECT_EQ(back.vocab_size, cfg.vocab_size);
}

}  // namespace
}  // namespace spokendial::model
