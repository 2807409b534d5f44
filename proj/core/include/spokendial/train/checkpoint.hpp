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
#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "spokendial/numerics/autograd.hpp"

namespace spokendial::train {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  numerics::Tensor<float> value;
};

// Everything needed to continue a run. Data order and per-example
// randomness are derived from (config seed, step), so the step counter is
// the whole RNG state.
struct Checkpoint {
  int version = kCheckpointVersion;
  // "pretrain" or "finetune".
  std::string kind;
  std::size_t step = 0;
  nlohmann::json config;
  std::vector<std::string> vocab;
  std::vector<NamedTensor> parameters;
  std::size_t optimizer_step = 0;
  std::vector<NamedTensor> first_moments;
  std::vector<NamedTensor> second_moments;
};

// Layout: 8-byte magic, u32 version, u64 header size, JSON header, then
// little-endian float32 payload with a CRC-32 recorded in the header.
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws CheckpointError for a wrong magic, unsupported version,
// truncation or checksum mismatch.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

std::vector<NamedTensor> CaptureParameters(const numerics::ParameterRefs<float>& params);

// Copies values into `params` by name. Every parameter must be present with
// a matching shape unless `allow_missing`, in which case parameters without
// a record keep their values. Returns how many were restored; records
// without a matching parameter are ignored.
std::size_t RestoreParameters(const numerics::ParameterRefs<float>& params,
                              const std::vector<NamedTensor>& records, bool allow_missing = false);

}  // namespace spokendial::train
