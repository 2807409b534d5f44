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

#include "spokendial/train/checkpoint.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace spokendial::train {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'S', 'P', 'K', 'D', 'C', 'K', 'P', 'T'};

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
std::uint64_t GetLE(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t Crc(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t at = 0;
  while (at < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - at, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + at), chunk);
    at += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void AppendGroup(const std::vector<NamedTensor>& group, const std::string& label,
                 json& index, std::string& payload) {
  for (const auto& t : group) {
    index.push_back({{"name", t.name},
                     {"group", label},
                     {"shape", t.value.shape()},
                     {"offset", payload.size()}});
    for (float v : t.value.values()) PutU32(payload, std::bit_cast<std::uint32_t>(v));
  }
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json index = json::array();
  std::string payload;
  AppendGroup(ckpt.parameters, "param", index, payload);
  AppendGroup(ckpt.first_moments, "adam_m", index, payload);
  AppendGroup(ckpt.second_moments, "adam_v", index, payload);
  const json header = {{"kind", ckpt.kind},
                       {"step", ckpt.step},
                       {"config", ckpt.config},
                       {"vocab", ckpt.vocab},
                       {"optimizer_step", ckpt.optimizer_step},
                       {"tensors", std::move(index)},
                       {"payload_bytes", payload.size()},
                       {"payload_crc32", Crc(payload)}};
  const std::string text = header.dump();

  std::string out(kMagic.begin(), kMagic.end());
  PutU32(out, static_cast<std::uint32_t>(ckpt.version));
  PutU64(out, text.size());
  out += text;
  out += payload;

  // Write then rename so a crash never leaves a half-written checkpoint.
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), {});
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::string where = "checkpoint " + path.string() + ": ";
  if (bytes.size() < 20 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw CheckpointError(where + "not a checkpoint file");
  }
  Checkpoint ckpt;
  ckpt.version = static_cast<int>(GetLE(raw + 8, 4));
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError(where + "unsupported version " + std::to_string(ckpt.version));
  }
  const std::uint64_t header_size = GetLE(raw + 12, 8);
  if (header_size > bytes.size() - 20) throw CheckpointError(where + "truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(20, header_size));
  } catch (const json::exception& e) {
    throw CheckpointError(where + "bad header: " + e.what());
  }
  const std::string payload = bytes.substr(20 + header_size);
  if (payload.size() != header.at("payload_bytes").get<std::size_t>()) {
    throw CheckpointError(where + "truncated payload");
  }
  if (Crc(payload) != header.at("payload_crc32").get<std::uint32_t>()) {
    throw CheckpointError(where + "payload checksum mismatch");
  }

  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.step = header.at("step").get<std::size_t>();
  ckpt.config = header.at("config");
  ckpt.vocab = header.at("vocab").get<std::vector<std::string>>();
  ckpt.optimizer_step = header.at("optimizer_step").get<std::size_t>();
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (const auto& t : header.at("tensors")) {
    NamedTensor nt{t.at("name").get<std::string>(),
                   numerics::Tensor<float>(t.at("shape").get<numerics::Shape>())};
    const std::size_t offset = t.at("offset").get<std::size_t>();
    if (offset + 4 * nt.value.size() > payload.size()) {
      throw CheckpointError(where + "tensor '" + nt.name + "' outside the payload");
    }
    for (std::size_t i = 0; i < nt.value.size(); ++i) {
      nt.value[i] = std::bit_cast<float>(static_cast<std::uint32_t>(GetLE(p + offset + 4 * i, 4)));
    }
    const auto group = t.at("group").get<std::string>();
    if (group == "param") {
      ckpt.parameters.push_back(std::move(nt));
    } else if (group == "adam_m") {
      ckpt.first_moments.push_back(std::move(nt));
    } else if (group == "adam_v") {
      ckpt.second_moments.push_back(std::move(nt));
    } else {
      throw CheckpointError(where + "unknown tensor group '" + group + "'");
    }
  }
  return ckpt;
}

std::vector<NamedTensor> CaptureParameters(const numerics::ParameterRefs<float>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back({p->name(), p->value()});
  return out;
}

std::size_t RestoreParameters(const numerics::ParameterRefs<float>& params,
                              const std::vector<NamedTensor>& records, bool allow_missing) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& r : records) by_name.emplace(r.name, &r);
  std::size_t restored = 0;
  for (auto* p : params) {
    auto it = by_name.find(p->name());
    if (it == by_name.end()) {
      if (allow_missing) continue;
      throw CheckpointError("checkpoint has no parameter '" + p->name() + "'");
    }
    if (it->second->value.shape() != p->shape()) {
      throw CheckpointError("parameter '" + p->name() + "' has shape " +
                            numerics::ShapeToString(p->shape()) + " but the checkpoint holds " +
                            numerics::ShapeToString(it->second->value.shape()));
    }
    p->mutable_value() = it->second->value;
    ++restored;
  }
  return restored;
}

}  // namespace spokendial::train
