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

#include "spokendial/corpus/synthetic.hpp"
#include "spokendial/model/model.hpp"
#include "spokendial/train/config.hpp"

// Small configurations that train in seconds to minutes on one core. The
// CLI exposes them by name and the acceptance suite runs them as is.
namespace spokendial::train {

// Every encoder `layers` deep at width `hidden`, 4 heads, FFN 4x. The
// vocabulary size is left at 0 for the trainer to fill in.
model::ModelConfig DeskModel(std::size_t hidden, std::size_t layers);

// 8 dialogs of 5 turns, i.e. 32 samples.
corpus::SyntheticConfig OverfitCorpus();
inline constexpr std::uint64_t kOverfitCorpusSeed = 7;
TrainConfig OverfitPretrain();

// Dialogs for the cross-modal 4-class task (3 words per turn, so the text
// bit never ties).
corpus::SyntheticConfig CrossModalCorpus();
TrainConfig CrossModalPretrain();
TrainConfig CrossModalFinetune();

}  // namespace spokendial::train
