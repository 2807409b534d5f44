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

#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

#include "spokendial/model/encoders.hpp"

namespace spokendial::model {

class CaptureNotEnabledError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Mean over text rows of the attention mass placed on speech columns.
double CrossModalMass(const numerics::Tensor<double>& attention, std::size_t text_length);

struct AttentionExport {
  std::vector<std::filesystem::path> files;
  nlohmann::json metadata;
};

// Writes `<stem>.csv` (head average), `<stem>.head<h>.csv` per head and
// `<stem>.json` with the text and speech spans, any `extra` keys and the
// cross-modal mass. Throws CaptureNotEnabledError when the forward pass ran
// without attention capture.
template <typename T>
AttentionExport ExportAttention(const FusedRepresentation<T>& fused,
                                const std::filesystem::path& stem,
                                const nlohmann::json& extra = nlohmann::json::object());

}  // namespace spokendial::model
