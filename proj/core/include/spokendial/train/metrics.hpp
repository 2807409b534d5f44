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
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace spokendial::train {

struct MetricsRecord {
  std::size_t step = 0;
  // Loss components and other per-step scalars, keyed by name.
  std::map<std::string, double> values;
  double lr = 0.0;
  // Seconds since the run (or resumed run) started.
  double wall_time = 0.0;

  // Equality ignores wall time.
  bool SameTrajectory(const MetricsRecord& other) const {
    return step == other.step && values == other.values && lr == other.lr;
  }
};

std::string FormatMetrics(const MetricsRecord& r);
MetricsRecord ParseMetrics(const std::string& line);

// Append-only JSON-lines log. Steps must strictly increase, including
// across reopenings of an existing file.
class MetricsLog {
 public:
  // Opens for append; an existing file is scanned for its last step.
  explicit MetricsLog(const std::filesystem::path& path);

  void Append(const MetricsRecord& r);
  std::size_t last_step() const { return last_step_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t last_step_ = 0;
  bool any_ = false;
};

std::vector<MetricsRecord> ReadMetrics(const std::filesystem::path& path);

}  // namespace spokendial::train
