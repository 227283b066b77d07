// Copyright 2026 The duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DUET_CHECKPOINT_HPP_
#define DUET_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "duet/trainer.hpp"

namespace duet {

/// Everything needed to resume training bit-exactly.
struct Checkpoint {
  static constexpr int kVersion = 1;

  NetConfig config;
  int schedule_steps = ScheduleDefaults::kSteps;
  double beta_min = ScheduleDefaults::kBetaMin;
  double beta_max = ScheduleDefaults::kBetaMax;
  TrainerOptions options;
  Params params;
  AdamState adam;
  Rng rng;

  static Checkpoint from_trainer(const Trainer& trainer);
  Trainer to_trainer() const;
  NoiseSchedule schedule() const { return make_schedule(schedule_steps, beta_min, beta_max); }
};

/// Structured-text (JSON) encoding; numbers are written with round-trip
/// precision so decode(encode(c)) reproduces every tensor bit for bit.
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws InputError on unreadable files, unknown versions or shape mismatches.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace duet

#endif  // DUET_CHECKPOINT_HPP_
