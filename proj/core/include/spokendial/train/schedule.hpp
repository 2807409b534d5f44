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
#include <string>

namespace spokendial::train {

enum class ScheduleKind { kLinear, kCosine };

std::string ScheduleName(ScheduleKind kind);
// Accepts "linear" and "cosine"; throws std::invalid_argument otherwise.
ScheduleKind ParseSchedule(const std::string& name);

// Linear ramp from 0 to `peak` over the warmup steps, then a linear or
// cosine decay to 0 at `total_steps`.
struct Schedule {
  ScheduleKind kind = ScheduleKind::kLinear;
  double peak = 1e-4;
  double warmup_fraction = 0.01;
  std::size_t total_steps = 1;

  void Validate() const;
  // round(warmup_fraction * total_steps).
  std::size_t warmup_steps() const;
  // Throws std::out_of_range for step > total_steps.
  double operator()(std::size_t step) const;
};

}  // namespace spokendial::train
