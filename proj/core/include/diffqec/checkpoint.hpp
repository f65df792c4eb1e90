// Copyright 2026 The diffqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIFFQEC_CHECKPOINT_HPP
#define DIFFQEC_CHECKPOINT_HPP

#include <string>

#include "diffqec/denoiser.hpp"
#include "diffqec/schedule.hpp"

namespace diffqec {

inline constexpr const char* kCheckpointFormat = "diffqec-ckpt-1";

struct Checkpoint {
  DenoiserParams params;
  NoiseSchedule schedule;
};

/// Structured-text (JSON) checkpoint: format tag, config, schedule, and all
/// weight arrays as nested lists of doubles. Round-trips losslessly.
void save_checkpoint(const DenoiserParams& params, const NoiseSchedule& schedule,
                     const std::string& path);

/// Throws std::runtime_error with format diagnostics on unknown tags,
/// malformed documents, or shape mismatches.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace diffqec

#endif  // DIFFQEC_CHECKPOINT_HPP
