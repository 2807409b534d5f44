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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spokendial/corpus/dialog.hpp"

// On-disk corpus layout:
//
//   corpus.json            manifest (JSON, see CorpusManifest)
//   corpus-00000.shard     waveforms of a run of dialogs, little-endian
//   corpus-00001.shard     float32, turn after turn, dialog after dialog
//
// Each shard carries its byte length and CRC-32 in the manifest; each dialog
// record carries its shard, byte offset and byte length, plus per-turn sample
// counts and word alignments.
namespace spokendial::corpus {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr const char* kCorpusFormatName = "spokendial-corpus";

class CorpusFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShardInfo {
  std::string file;  // relative to the manifest directory
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct TurnRecord {
  std::size_t turn_index = 1;
  std::uint64_t num_samples = 0;
  int tone = 0;
  std::vector<WordAlignment> words;
};

struct DialogRecord {
  std::string dialog_id;
  std::size_t shard = 0;
  std::uint64_t offset = 0;
  std::uint64_t bytes = 0;
  std::vector<TurnRecord> turns;
};

struct CorpusManifest {
  int version = kCorpusFormatVersion;
  double sample_rate = 100.0;
  double max_turn_seconds = kDefaultMaxTurnSeconds;
  std::vector<ShardInfo> shards;
  std::vector<DialogRecord> dialogs;
};

// Read-only after load; safe to share across threads.
struct Corpus {
  CorpusManifest manifest;
  std::vector<Dialog> dialogs;
};

struct ShardWriteOptions {
  std::size_t dialogs_per_shard = 64;
  double max_turn_seconds = kDefaultMaxTurnSeconds;
};

// Validates every dialog, then writes shards next to `manifest_path` and the
// manifest itself. All turns must share one sample rate.
CorpusManifest WriteShards(const std::vector<Dialog>& dialogs,
                           const std::filesystem::path& manifest_path,
                           const ShardWriteOptions& options = {});

// Throws CorpusFormatError on unknown version, missing or truncated shard,
// checksum mismatch or out-of-range offsets. Nothing is returned unless the
// whole corpus verifies.
Corpus LoadCorpus(const std::filesystem::path& manifest_path);

CorpusManifest ReadManifest(const std::filesystem::path& manifest_path);

}  // namespace spokendial::corpus
