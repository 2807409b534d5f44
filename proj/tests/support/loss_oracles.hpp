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

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "spokendial/numerics/tensor.hpp"
#include "spokendial/text/token_masking.hpp"
#include "spokendial/text/tokenize.hpp"

// Scalar recomputations of the pre-training losses: plain loops over tensor
// entries, no tensor ops.
namespace spokendial::testing {

using numerics::Tensor;
using text::WordBoundary;

inline double Dot(const Tensor<double>& h, std::size_t row, const Tensor<double>& w, std::size_t col,
           std::size_t d) {
  double acc = 0;
  for (std::size_t c = 0; c < d; ++c) acc += h(row, c) * w(c, col);
  return acc;
}

inline double TppOracle(const Tensor<double>& h, const std::vector<WordBoundary>& words,
                 const Tensor<double>& ws, const Tensor<double>& we, double la) {
  double total = 0;
  for (const auto& w : words) {
    const double ds = Dot(h, w.first_token, ws, 0, h.cols()) - w.start_time / la;
    const double de = Dot(h, w.last_token, we, 0, h.cols()) - w.end_time / la;
    total += 0.5 * (ds * ds + de * de);
  }
  return total / static_cast<double>(words.size());
}

inline double CrossEntropyOracle(const std::vector<double>& logits, std::size_t label) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0;
  for (double v : logits) z += std::exp(v - mx);
  return -(logits[label] - mx - std::log(z));
}

inline std::vector<double> AffineRow(const Tensor<double>& h, std::size_t row, const Tensor<double>& w,
                              const Tensor<double>& b) {
  std::vector<double> out(w.cols());
  for (std::size_t o = 0; o < w.cols(); ++o) out[o] = b[o] + Dot(h, row, w, o, h.cols());
  return out;
}

inline std::vector<WordBoundary> RandomWords(std::size_t count, std::size_t text_length,
                                      std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pos(0, text_length - 1);
  std::uniform_real_distribution<double> t(0.0, 10.0);
  std::vector<WordBoundary> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t a = pos(rng), b = pos(rng);
    double s = t(rng), e = t(rng);
    out.push_back({std::min(a, b), std::max(a, b), std::min(s, e), std::max(s, e),
                   i % 2 ? corpus::SpeechTurn::kCurrent : corpus::SpeechTurn::kPrevious});
  }
  return out;
}

inline double CmlmOracle(const Tensor<double>& h, const text::TextMaskPlan& plan,
                         const Tensor<double>& w, const Tensor<double>& b) {
  double total = 0;
  for (std::size_t m = 0; m < plan.size(); ++m) {
    total += CrossEntropyOracle(AffineRow(h, plan.positions[m], w, b), plan.labels[m]);
  }
  return plan.size() == 0 ? 0.0 : total / static_cast<double>(plan.size());
}

inline double CmamOracle(const Tensor<double>& h, const std::vector<std::size_t>& rows,
                         const Tensor<double>& targets, const Tensor<double>& w,
                         const Tensor<double>& b) {
  double total = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto pred = AffineRow(h, rows[k], w, b);
    for (std::size_t c = 0; c < pred.size(); ++c) total += std::abs(pred[c] - targets(k, c));
  }
  return total / static_cast<double>(rows.size() * w.cols());
}

}  // namespace spokendial::testing
