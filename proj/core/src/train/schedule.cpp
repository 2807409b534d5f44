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

#include "spokendial/train/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spokendial::train {

std::string ScheduleName(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "cosine";
}

ScheduleKind ParseSchedule(const std::string& name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "cosine") return ScheduleKind::kCosine;
  throw std::invalid_argument("unknown schedule '" + name + "' (expected linear or cosine)");
}

void Schedule::Validate() const {
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw std::invalid_argument("Schedule: warmup fraction must lie in [0, 1]");
  }
  if (!(peak >= 0.0)) throw std::invalid_argument("Schedule: peak must be >= 0");
  if (total_steps == 0) throw std::invalid_argument("Schedule: total steps must be positive");
}

std::size_t Schedule::warmup_steps() const {
  return static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
}

double Schedule::operator()(std::size_t step) const {
  if (step > total_steps) {
    throw std::out_of_range("Schedule: step " + std::to_string(step) + " beyond total " +
                            std::to_string(total_steps));
  }
  const std::size_t warmup = warmup_steps();
  if (step < warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
  if (warmup == total_steps) return peak;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  if (kind == ScheduleKind::kLinear) return peak * (1.0 - progress);
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace spokendial::train
