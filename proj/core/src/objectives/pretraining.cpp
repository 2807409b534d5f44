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

#include "spokendial/objectives/pretraining.hpp"

#include "spokendial/numerics/ops.hpp"

namespace spokendial::objectives {

using numerics::Var;

PretrainExample PrepareExample(const corpus::Sample& sample, const CrsSampler* sampler,
                               const text::Vocab& vocab, const text::Tokenizer& tokenizer,
                               const speech::FrontendConfig& frontend, std::mt19937_64& rng,
                               const PretrainOptions& options) {
  PretrainExample ex;
  if (options.weights.use_crs && sampler != nullptr) {
    ex.crs = sampler->Make(sample, rng, options.crs);
  } else {
    ex.crs.sample = sample;
  }
  ex.tokens = text::TokenizeSample(ex.crs.sample, vocab, tokenizer, options.max_text_length);
  ex.text_mask = text::MaskTokens(ex.tokens.token_ids, vocab.size(), rng, options.token_mask);
  ex.corrupted_ids = text::ApplyTextMask(ex.tokens.token_ids, ex.text_mask);
  ex.prev_mask = masking::PlanSpeechMask(frontend.NumFrames(ex.crs.sample.speech_prev.size()), rng,
                                         options.acoustic_mask);
  ex.cur_mask = masking::PlanSpeechMask(frontend.NumFrames(ex.crs.sample.speech_cur.size()), rng,
                                        options.acoustic_mask);
  ex.tpp_boundaries = options.tpp_on_masked
                          ? ex.tokens.word_boundaries
                          : UnmaskedBoundaries(ex.tokens.word_boundaries, ex.text_mask);
  return ex;
}

template <typename T>
PretrainHeads<T>::PretrainHeads(const model::ModelConfig& config, std::mt19937_64& rng,
                                double max_speech_seconds)
    : tpp(config.hidden(), rng, max_speech_seconds),
      crs(config.hidden(), kNumCrsClasses, rng, "crs"),
      lm(config.hidden(), config.vocab_size, rng, "cmlm"),
      cmam(config.hidden(), config.frontend.feature_dim(), rng, "cmam") {}

template <typename T>
numerics::ParameterRefs<T> PretrainHeads<T>::Parameters() {
  numerics::ParameterRefs<T> out;
  for (auto ps : {tpp.Parameters(), crs.Parameters(), lm.Parameters(), cmam.Parameters()}) {
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

template <typename T>
PretrainModel<T>::PretrainModel(const model::ModelConfig& config, std::uint64_t seed,
                                double max_speech_seconds)
    : encoder(config, seed),
      head_rng(seed ^ 0x5bd1e995ULL),
      heads(config, head_rng, max_speech_seconds) {}

template <typename T>
numerics::ParameterRefs<T> PretrainModel<T>::Parameters() {
  auto out = encoder.Parameters();
  auto h = heads.Parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

namespace {

// Masked frame rows in the fused sequence and their unmasked extractor
// targets, for the turns that still provide targets.
template <typename T>
void CollectCmam(const model::ModelOutput<T>& out, const Var<T>& prev, const Var<T>& cur,
                 const PretrainExample& ex, std::vector<std::size_t>& rows,
                 std::vector<Var<T>>& targets) {
  auto add = [&](const masking::MaskPlan& plan, const Var<T>& features, bool prev_turn) {
    const std::size_t frames = prev_turn ? out.prev_frames : out.cur_frames;
    if (plan.size() != frames) {
      throw numerics::ShapeError("CMAM: mask plan covers " + std::to_string(plan.size()) +
                                 " frames but the turn has " + std::to_string(frames));
    }
    const auto idx = plan.MaskedIndices();
    if (idx.empty()) return;
    for (auto j : idx) rows.push_back(prev_turn ? out.PrevFrameRow(j) : out.CurFrameRow(j));
    targets.push_back(
        numerics::Detach(numerics::GatherRows(features, std::span<const std::size_t>(idx))));
  };
  if (ex.crs.cmam_prev) add(ex.prev_mask, prev, true);
  if (ex.crs.cmam_cur) add(ex.cur_mask, cur, false);
}

}  // namespace

template <typename T>
PretrainLosses<T> ComputePretrainLosses(const PretrainModel<T>& m, const PretrainExample& ex,
                                        const PretrainOptions& options,
                                        std::mt19937_64* dropout_rng, bool capture_attention) {
  const auto& s = ex.crs.sample;
  auto prev = m.encoder.ExtractFeatures(s.speech_prev);
  auto cur = m.encoder.ExtractFeatures(s.speech_cur);
  auto masked_prev = masking::ApplySpeechMask(prev, ex.prev_mask);
  auto masked_cur = masking::ApplySpeechMask(cur, ex.cur_mask);

  PretrainLosses<T> result;
  model::TextInput input{ex.corrupted_ids, ex.tokens.position_ids, ex.tokens.segment_ids, {}};
  result.output = m.encoder.Forward(input, masked_prev, masked_cur, dropout_rng, capture_attention);
  const auto& h = result.output.fused.hidden;
  const std::size_t n = result.output.fused.text_length;

  auto& c = result.components;
  c.tpp = TppLoss(h, n, std::span<const text::WordBoundary>(ex.tpp_boundaries), m.heads.tpp);
  if (options.weights.use_crs) c.crs = CrsLoss(h, ex.crs.label_index(), m.heads.crs);
  c.cmlm = CmlmLoss(h, n, ex.text_mask, m.heads.lm);
  std::vector<std::size_t> rows;
  std::vector<Var<T>> targets;
  CollectCmam(result.output, prev, cur, ex, rows, targets);
  if (rows.empty()) {
    c.cmam = Var<T>::Constant(numerics::Tensor<T>::Zeros(1, 1));
  } else {
    auto target = targets.size() == 1 ? targets[0] : numerics::ConcatRows<T>(targets);
    c.cmam = CmamLoss(h, std::span<const std::size_t>(rows), target, m.heads.cmam);
  }
  result.joint = JointLoss(c, options.weights);
  return result;
}

template struct PretrainHeads<float>;
template struct PretrainHeads<double>;
template struct PretrainModel<float>;
template struct PretrainModel<double>;
template PretrainLosses<float> ComputePretrainLosses(const PretrainModel<float>&,
                                                     const PretrainExample&,
                                                     const PretrainOptions&, std::mt19937_64*,
                                                     bool);
template PretrainLosses<double> ComputePretrainLosses(const PretrainModel<double>&,
                                                      const PretrainExample&,
                                                      const PretrainOptions&, std::mt19937_64*,
                                                      bool);

}  // namespace spokendial::objectives
