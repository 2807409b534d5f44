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

#include "spokendial/objectives/losses.hpp"

#include <algorithm>
#include <stdexcept>

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::objectives {

using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

namespace {

template <typename T>
Var<T> ZeroLoss() {
  return Var<T>::Constant(Tensor<T>::Zeros(1, 1));
}

template <typename T>
void CheckBoundaries(const Var<T>& hidden, std::size_t text_length,
                     std::span<const text::WordBoundary> boundaries) {
  if (text_length > hidden.rows()) {
    throw std::out_of_range("TPP: text length exceeds the fused sequence");
  }
  for (const auto& b : boundaries) {
    if (b.first_token > b.last_token || b.last_token >= text_length) {
      throw std::out_of_range("TPP: word boundary [" + std::to_string(b.first_token) + ", " +
                              std::to_string(b.last_token) + "] outside the text span of " +
                              std::to_string(text_length) + " tokens");
    }
  }
}

}  // namespace

template <typename T>
TppHead<T>::TppHead(std::size_t hidden, std::mt19937_64& rng, double max_speech_seconds,
                    const std::string& prefix)
    : max_speech_seconds_(max_speech_seconds),
      start_(prefix + ".start", numerics::XavierUniform<T>(hidden, 1, rng)),
      end_(prefix + ".end", numerics::XavierUniform<T>(hidden, 1, rng)) {
  if (!(max_speech_seconds > 0.0)) {
    throw std::invalid_argument("TppHead: maximum speech length must be positive");
  }
}

template <typename T>
Var<T> TppLoss(const Var<T>& hidden, std::size_t text_length,
               std::span<const text::WordBoundary> boundaries, const TppHead<T>& head) {
  CheckBoundaries(hidden, text_length, boundaries);
  if (boundaries.empty()) return ZeroLoss<T>();
  const std::size_t w = boundaries.size();
  std::vector<std::size_t> first(w), last(w);
  Tensor<T> start_target({w, 1}), end_target({w, 1});
  const double la = head.max_speech_seconds();
  for (std::size_t j = 0; j < w; ++j) {
    first[j] = boundaries[j].first_token;
    last[j] = boundaries[j].last_token;
    start_target[j] = static_cast<T>(boundaries[j].start_time / la);
    end_target[j] = static_cast<T>(boundaries[j].end_time / la);
  }
  auto ps = numerics::MatMul(numerics::GatherRows(hidden, std::span<const std::size_t>(first)),
                             head.start().var());
  auto pe = numerics::MatMul(numerics::GatherRows(hidden, std::span<const std::size_t>(last)),
                             head.end().var());
  auto ls = numerics::MeanSquaredError(ps, Var<T>::Constant(std::move(start_target)));
  auto le = numerics::MeanSquaredError(pe, Var<T>::Constant(std::move(end_target)));
  return numerics::Scale(ls + le, T(0.5));
}

template <typename T>
TppPredictions PredictTimes(const Var<T>& hidden, std::size_t text_length,
                            std::span<const text::WordBoundary> boundaries, const TppHead<T>& head) {
  CheckBoundaries(hidden, text_length, boundaries);
  TppPredictions out;
  const auto& h = hidden.value();
  const auto& ws = head.start().value();
  const auto& we = head.end().value();
  for (const auto& b : boundaries) {
    double s = 0, e = 0;
    for (std::size_t c = 0; c < h.cols(); ++c) {
      s += static_cast<double>(h(b.first_token, c)) * ws[c];
      e += static_cast<double>(h(b.last_token, c)) * we[c];
    }
    out.start.push_back(s);
    out.end.push_back(e);
  }
  return out;
}

std::vector<text::WordBoundary> UnmaskedBoundaries(std::span<const text::WordBoundary> boundaries,
                                                   const text::TextMaskPlan& plan) {
  auto masked = [&](std::size_t pos) {
    return std::binary_search(plan.positions.begin(), plan.positions.end(), pos);
  };
  std::vector<text::WordBoundary> out;
  for (const auto& b : boundaries) {
    if (!masked(b.first_token) && !masked(b.last_token)) out.push_back(b);
  }
  return out;
}

template <typename T>
LinearHead<T>::LinearHead(std::size_t hidden, std::size_t out, std::mt19937_64& rng,
                          const std::string& prefix)
    : weight_(prefix + ".weight", numerics::XavierUniform<T>(hidden, out, rng)),
      bias_(prefix + ".bias", Tensor<T>::Zeros(1, out)) {}

template <typename T>
Var<T> LinearHead<T>::Forward(const Var<T>& rows) const {
  return numerics::AddRow(numerics::MatMul(rows, weight_.var()), bias_.var());
}

template <typename T>
Var<T> CrsLogits(const Var<T>& hidden, const LinearHead<T>& head) {
  if (head.weight().value().cols() != kNumCrsClasses) {
    throw numerics::ShapeError("CRS head must have four outputs");
  }
  return head.Forward(numerics::SliceRows(hidden, 0, 1));
}

template <typename T>
Var<T> CrsLoss(const Var<T>& hidden, std::size_t label, const LinearHead<T>& head) {
  if (label >= kNumCrsClasses) throw std::out_of_range("CRS label must be in [0, 4)");
  const std::size_t target[] = {label};
  return numerics::CrossEntropy(CrsLogits(hidden, head), std::span<const std::size_t>(target));
}

template <typename T>
Var<T> CmlmLoss(const Var<T>& hidden, std::size_t text_length, const text::TextMaskPlan& plan,
                const LinearHead<T>& head) {
  if (plan.empty()) return ZeroLoss<T>();
  for (auto p : plan.positions) {
    if (p >= text_length) throw std::out_of_range("CMLM: masked position outside the text span");
  }
  auto rows = numerics::GatherRows(hidden, std::span<const std::size_t>(plan.positions));
  return numerics::CrossEntropy(head.Forward(rows), std::span<const std::size_t>(plan.labels));
}

template <typename T>
Var<T> CmamLoss(const Var<T>& hidden, std::span<const std::size_t> rows, const Var<T>& targets,
                const LinearHead<T>& head) {
  if (rows.size() != targets.rows()) {
    throw numerics::ShapeError("CMAM: " + std::to_string(rows.size()) + " masked rows but " +
                               std::to_string(targets.rows()) + " target frames");
  }
  if (rows.empty()) return ZeroLoss<T>();
  for (auto r : rows) {
    if (r >= hidden.rows()) throw std::out_of_range("CMAM: masked frame row outside the sequence");
  }
  auto pred = head.Forward(numerics::GatherRows(hidden, rows));
  return numerics::MeanAbsoluteError(pred, targets);
}

void LossWeights::Validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("LossWeights: alpha must be non-negative");
}

template <typename T>
Var<T> JointLoss(const LossComponents<T>& c, const LossWeights& weights) {
  weights.Validate();
  Var<T> total;
  auto add = [&](const Var<T>& v) { total = total.defined() ? total + v : v; };
  if (c.tpp.defined() && weights.alpha > 0.0) add(numerics::Scale(c.tpp, static_cast<T>(weights.alpha)));
  if (c.crs.defined() && weights.use_crs) add(c.crs);
  if (c.cmlm.defined()) add(c.cmlm);
  if (c.cmam.defined()) add(c.cmam);
  if (!total.defined()) throw std::invalid_argument("JointLoss: no loss component is active");
  return total;
}

#define SPOKENDIAL_INSTANTIATE_LOSSES(T)                                                     \
  template class TppHead<T>;                                                                 \
  template class LinearHead<T>;                                                              \
  template Var<T> TppLoss(const Var<T>&, std::size_t, std::span<const text::WordBoundary>,   \
                          const TppHead<T>&);                                                \
  template TppPredictions PredictTimes(const Var<T>&, std::size_t,                           \
                                       std::span<const text::WordBoundary>, const TppHead<T>&); \
  template Var<T> CrsLogits(const Var<T>&, const LinearHead<T>&);                            \
  template Var<T> CrsLoss(const Var<T>&, std::size_t, const LinearHead<T>&);                 \
  template Var<T> CmlmLoss(const Var<T>&, std::size_t, const text::TextMaskPlan&,            \
                           const LinearHead<T>&);                                            \
  template Var<T> CmamLoss(const Var<T>&, std::span<const std::size_t>, const Var<T>&,       \
                           const LinearHead<T>&);                                            \
  template Var<T> JointLoss(const LossComponents<T>&, const LossWeights&);

SPOKENDIAL_INSTANTIATE_LOSSES(float)
SPOKENDIAL_INSTANTIATE_LOSSES(double)

}  // namespace spokendial::objectives
