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

#include "spokendial/text/embedding.hpp"

#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::text {

using numerics::Parameter;
using numerics::Var;

template <typename T>
TextEmbedding<T>::TextEmbedding(std::size_t vocab_size, std::size_t max_length,
                                std::size_t hidden, std::mt19937_64& rng,
                                const std::string& prefix, double init_std)
    : token_(prefix + ".token_embedding",
             numerics::RandomNormal<T>(vocab_size, hidden, init_std, rng)),
      position_(prefix + ".position_embedding",
                numerics::RandomNormal<T>(max_length, hidden, init_std, rng)),
      segment_(prefix + ".segment_embedding", numerics::RandomNormal<T>(2, hidden, init_std, rng)) {}

template <typename T>
Var<T> TextEmbedding<T>::Embed(std::span<const std::size_t> token_ids,
                               std::span<const std::size_t> position_ids,
                               std::span<const std::size_t> segment_ids) const {
  const std::size_t n = token_ids.size();
  if (position_ids.size() != n || segment_ids.size() != n) {
    throw numerics::ShapeError("TextEmbedding: token, position and segment ids differ in length");
  }
  if (n > max_length()) {
    throw TruncationError("TextEmbedding: " + std::to_string(n) +
                          " tokens exceed the maximum text length " +
                          std::to_string(max_length()) + "; truncate history turns first");
  }
  return numerics::GatherRows(token_.var(), token_ids) +
         numerics::GatherRows(position_.var(), position_ids) +
         numerics::GatherRows(segment_.var(), segment_ids);
}

template class TextEmbedding<float>;
template class TextEmbedding<double>;

}  // namespace spokendial::text
