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

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "spokendial/numerics/autograd.hpp"
#include "spokendial/text/tokenize.hpp"

namespace spokendial::text {

// Token, absolute position and segment tables, each with d_h columns.
template <typename T>
class TextEmbedding {
 public:
  TextEmbedding(std::size_t vocab_size, std::size_t max_length, std::size_t hidden,
                std::mt19937_64& rng, const std::string& prefix = "text", double init_std = 0.02);

  std::size_t vocab_size() const { return token_.value().rows(); }
  std::size_t max_length() const { return position_.value().rows(); }
  std::size_t hidden() const { return token_.value().cols(); }

  numerics::Parameter<T>& token() { return token_; }
  numerics::Parameter<T>& position() { return position_; }
  numerics::Parameter<T>& segment() { return segment_; }
  const numerics::Parameter<T>& token() const { return token_; }
  const numerics::Parameter<T>& position() const { return position_; }
  const numerics::Parameter<T>& segment() const { return segment_; }
  numerics::ParameterRefs<T> Parameters() { return {&token_, &position_, &segment_}; }

  // Row j = token[token_ids[j]] + position[position_ids[j]] +
  // segment[segment_ids[j]]. Throws TruncationError when the sequence is
  // longer than the position table.
  numerics::Var<T> Embed(std::span<const std::size_t> token_ids,
                         std::span<const std::size_t> position_ids,
                         std::span<const std::size_t> segment_ids) const;
  numerics::Var<T> Embed(const TokenizedInput& input) const {
    return Embed(input.token_ids, input.position_ids, input.segment_ids);
  }

 private:
  numerics::Parameter<T> token_;
  numerics::Parameter<T> position_;
  numerics::Parameter<T> segment_;
};

extern template class TextEmbedding<float>;
extern template class TextEmbedding<double>;

}  // namespace spokendial::text
