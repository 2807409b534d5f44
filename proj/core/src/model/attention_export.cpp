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

#include "spokendial/model/attention_export.hpp"

#include <fstream>
#include <iomanip>

namespace spokendial::model {

namespace fs = std::filesystem;

double CrossModalMass(const numerics::Tensor<double>& attention, std::size_t text_length) {
  if (text_length == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < text_length; ++r) {
    for (std::size_t c = text_length; c < attention.cols(); ++c) total += attention(r, c);
  }
  return total / static_cast<double>(text_length);
}

namespace {

void WriteCsv(const numerics::Tensor<double>& m, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << std::setprecision(9);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

template <typename T>
AttentionExport ExportAttention(const FusedRepresentation<T>& fused, const fs::path& stem,
                                const nlohmann::json& extra) {
  if (!fused.attention || fused.attention->heads.empty()) {
    throw CaptureNotEnabledError("ExportAttention: forward pass ran without attention capture");
  }
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  AttentionExport result;
  const auto avg = fused.attention->HeadAverage();
  auto with_suffix = [&](const std::string& s) { return fs::path(stem.string() + s); };
  result.files.push_back(with_suffix(".csv"));
  WriteCsv(avg, result.files.back());
  for (std::size_t h = 0; h < fused.attention->heads.size(); ++h) {
    result.files.push_back(with_suffix(".head" + std::to_string(h) + ".csv"));
    WriteCsv(fused.attention->heads[h].template Cast<double>(), result.files.back());
  }
  nlohmann::json meta = extra;
  meta["rows"] = avg.rows();
  meta["num_heads"] = fused.attention->heads.size();
  meta["text_span"] = {0, fused.text_length};
  meta["speech_span"] = {fused.text_length, fused.size()};
  meta["cross_modal_mass"] = CrossModalMass(avg, fused.text_length);
  meta["average_file"] = result.files.front().filename().string();
  result.files.push_back(with_suffix(".json"));
  std::ofstream(result.files.back(), std::ios::trunc) << meta.dump(1) << '\n';
  result.metadata = std::move(meta);
  return result;
}

template AttentionExport ExportAttention(const FusedRepresentation<float>&, const fs::path&,
                                         const nlohmann::json&);
template AttentionExport ExportAttention(const FusedRepresentation<double>&, const fs::path&,
                                         const nlohmann::json&);

}  // namespace spokendial::model
