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

#include "spokendial/corpus/shards.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace spokendial::corpus {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void AppendLittleEndian(std::vector<unsigned char>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

float ReadLittleEndian(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

std::uint32_t Crc32(const std::vector<unsigned char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t at = 0;
  while (at < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - at, 1u << 30));
    crc = crc32(crc, bytes.data() + at, chunk);
    at += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string Hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

std::string ShardName(const fs::path& manifest_path, std::size_t index) {
  std::ostringstream os;
  os << manifest_path.stem().string() << '-' << std::setw(5) << std::setfill('0') << index
     << ".shard";
  return os.str();
}

json WordsToJson(const std::vector<WordAlignment>& words) {
  json out = json::array();
  for (const auto& w : words) {
    out.push_back({{"word", w.word}, {"start", w.start_time}, {"end", w.end_time}});
  }
  return out;
}

json ManifestToJson(const CorpusManifest& m) {
  json shards = json::array();
  for (const auto& s : m.shards) {
    shards.push_back({{"file", s.file}, {"bytes", s.bytes}, {"crc32", Hex32(s.crc32)}});
  }
  json dialogs = json::array();
  for (const auto& d : m.dialogs) {
    json turns = json::array();
    for (const auto& t : d.turns) {
      turns.push_back({{"turn_index", t.turn_index},
                       {"num_samples", t.num_samples},
                       {"tone", t.tone},
                       {"words", WordsToJson(t.words)}});
    }
    dialogs.push_back({{"dialog_id", d.dialog_id},
                       {"shard", d.shard},
                       {"offset", d.offset},
                       {"bytes", d.bytes},
                       {"turns", std::move(turns)}});
  }
  return {{"format", kCorpusFormatName},
          {"version", m.version},
          {"sample_rate", m.sample_rate},
          {"max_turn_seconds", m.max_turn_seconds},
          {"shards", std::move(shards)},
          {"dialogs", std::move(dialogs)}};
}

CorpusManifest ManifestFromJson(const json& j) {
  if (j.value("format", std::string()) != kCorpusFormatName) {
    throw CorpusFormatError("manifest: not a spokendial corpus manifest");
  }
  CorpusManifest m;
  m.version = j.at("version").get<int>();
  if (m.version != kCorpusFormatVersion) {
    throw CorpusFormatError("manifest: unsupported corpus version " + std::to_string(m.version) +
                            " (expected " + std::to_string(kCorpusFormatVersion) + ")");
  }
  m.sample_rate = j.at("sample_rate").get<double>();
  m.max_turn_seconds = j.at("max_turn_seconds").get<double>();
  for (const auto& s : j.at("shards")) {
    ShardInfo info;
    info.file = s.at("file").get<std::string>();
    info.bytes = s.at("bytes").get<std::uint64_t>();
    info.crc32 = static_cast<std::uint32_t>(std::stoul(s.at("crc32").get<std::string>(), nullptr, 16));
    m.shards.push_back(std::move(info));
  }
  for (const auto& d : j.at("dialogs")) {
    DialogRecord rec;
    rec.dialog_id = d.at("dialog_id").get<std::string>();
    rec.shard = d.at("shard").get<std::size_t>();
    rec.offset = d.at("offset").get<std::uint64_t>();
    rec.bytes = d.at("bytes").get<std::uint64_t>();
    for (const auto& t : d.at("turns")) {
      TurnRecord tr;
      tr.turn_index = t.at("turn_index").get<std::size_t>();
      tr.num_samples = t.at("num_samples").get<std::uint64_t>();
      tr.tone = t.at("tone").get<int>();
      for (const auto& w : t.at("words")) {
        tr.words.push_back({w.at("word").get<std::string>(), w.at("start").get<double>(),
                            w.at("end").get<double>()});
      }
      rec.turns.push_back(std::move(tr));
    }
    m.dialogs.push_back(std::move(rec));
  }
  return m;
}

std::vector<unsigned char> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusFormatError("cannot open shard " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

CorpusManifest WriteShards(const std::vector<Dialog>& dialogs, const fs::path& manifest_path,
                           const ShardWriteOptions& options) {
  if (options.dialogs_per_shard == 0) {
    throw std::invalid_argument("WriteShards: dialogs_per_shard must be positive");
  }
  CorpusManifest manifest;
  manifest.max_turn_seconds = options.max_turn_seconds;
  bool have_rate = false;
  for (const auto& d : dialogs) {
    ValidateDialog(d, options.max_turn_seconds);
    for (const auto& t : d.turns) {
      if (!have_rate) {
        manifest.sample_rate = t.sample_rate;
        have_rate = true;
      } else if (t.sample_rate != manifest.sample_rate) {
        throw std::invalid_argument("WriteShards: mixed sample rates in dialog '" + d.dialog_id +
                                    "'");
      }
    }
  }

  const fs::path dir = manifest_path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);

  for (std::size_t begin = 0; begin < dialogs.size(); begin += options.dialogs_per_shard) {
    const std::size_t end = std::min(dialogs.size(), begin + options.dialogs_per_shard);
    const std::size_t shard_index = manifest.shards.size();
    std::vector<unsigned char> bytes;
    for (std::size_t i = begin; i < end; ++i) {
      const Dialog& d = dialogs[i];
      DialogRecord rec;
      rec.dialog_id = d.dialog_id;
      rec.shard = shard_index;
      rec.offset = bytes.size();
      for (const auto& t : d.turns) {
        for (float v : t.waveform) AppendLittleEndian(bytes, v);
        rec.turns.push_back({t.turn_index, t.waveform.size(), t.tone, t.words});
      }
      rec.bytes = bytes.size() - rec.offset;
      manifest.dialogs.push_back(std::move(rec));
    }
    ShardInfo info{ShardName(manifest_path, shard_index), bytes.size(), Crc32(bytes)};
    std::ofstream out(dir / info.file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("WriteShards: failed writing " + (dir / info.file).string());
    manifest.shards.push_back(std::move(info));
  }

  std::ofstream out(manifest_path, std::ios::trunc);
  out << ManifestToJson(manifest).dump(1) << '\n';
  if (!out) throw std::runtime_error("WriteShards: failed writing " + manifest_path.string());
  return manifest;
}

CorpusManifest ReadManifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw CorpusFormatError("cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
    return ManifestFromJson(j);
  } catch (const json::exception& e) {
    throw CorpusFormatError("manifest " + manifest_path.string() + ": " + e.what());
  }
}

Corpus LoadCorpus(const fs::path& manifest_path) {
  Corpus corpus;
  corpus.manifest = ReadManifest(manifest_path);
  const auto& m = corpus.manifest;
  const fs::path dir = manifest_path.parent_path();

  std::vector<std::vector<unsigned char>> shards;
  for (const auto& info : m.shards) {
    auto bytes = ReadFile(dir / info.file);
    if (bytes.size() != info.bytes) {
      throw CorpusFormatError("shard " + info.file + ": expected " + std::to_string(info.bytes) +
                              " bytes, found " + std::to_string(bytes.size()));
    }
    if (Crc32(bytes) != info.crc32) {
      throw CorpusFormatError("shard " + info.file + ": checksum mismatch");
    }
    shards.push_back(std::move(bytes));
  }

  for (const auto& rec : m.dialogs) {
    if (rec.shard >= shards.size()) {
      throw CorpusFormatError("dialog '" + rec.dialog_id + "': shard index out of range");
    }
    const auto& bytes = shards[rec.shard];
    std::uint64_t needed = 0;
    for (const auto& t : rec.turns) needed += 4 * t.num_samples;
    if (needed != rec.bytes || rec.offset + rec.bytes > bytes.size()) {
      throw CorpusFormatError("dialog '" + rec.dialog_id + "': record does not fit its shard");
    }
    Dialog d;
    d.dialog_id = rec.dialog_id;
    std::uint64_t at = rec.offset;
    for (const auto& tr : rec.turns) {
      Turn t;
      t.turn_index = tr.turn_index;
      t.sample_rate = m.sample_rate;
      t.tone = tr.tone;
      t.words = tr.words;
      t.waveform.resize(tr.num_samples);
      for (auto& v : t.waveform) {
        v = ReadLittleEndian(bytes.data() + at);
        at += 4;
      }
      d.turns.push_back(std::move(t));
    }
    corpus.dialogs.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace spokendial::corpus
