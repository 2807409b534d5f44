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

#include "spokendial/train/metrics.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace spokendial::train {

std::string FormatMetrics(const MetricsRecord& r) {
  nlohmann::json j = {{"step", r.step}, {"lr", r.lr}, {"wall_time", r.wall_time}};
  for (const auto& [k, v] : r.values) j[k] = v;
  return j.dump();
}

MetricsRecord ParseMetrics(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  MetricsRecord r;
  for (const auto& [k, v] : j.items()) {
    if (k == "step") {
      r.step = v.get<std::size_t>();
    } else if (k == "lr") {
      r.lr = v.get<double>();
    } else if (k == "wall_time") {
      r.wall_time = v.get<double>();
    } else {
      r.values[k] = v.get<double>();
    }
  }
  return r;
}

MetricsLog::MetricsLog(const std::filesystem::path& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    const auto existing = ReadMetrics(path);
    if (!existing.empty()) {
      last_step_ = existing.back().step;
      any_ = true;
    }
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open metrics log " + path.string());
}

void MetricsLog::Append(const MetricsRecord& r) {
  if (any_ && r.step <= last_step_) {
    throw std::logic_error("metrics log " + path_.string() + ": step " + std::to_string(r.step) +
                           " does not follow " + std::to_string(last_step_));
  }
  out_ << FormatMetrics(r) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("failed writing metrics log " + path_.string());
  last_step_ = r.step;
  any_ = true;
}

std::vector<MetricsRecord> ReadMetrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics log " + path.string());
  std::vector<MetricsRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(ParseMetrics(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace spokendial::train
