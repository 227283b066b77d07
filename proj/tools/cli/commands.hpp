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

#ifndef DUET_TOOLS_COMMANDS_HPP_
#define DUET_TOOLS_COMMANDS_HPP_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "duet/oracle.hpp"
#include "duet/sampler.hpp"

namespace duet::cli {

/// Builds the sampler input for one label pair; either the exact world
/// scores or a trained network with the world's conditions.
using ScoreFactory = std::function<GuidedScoreFn(const LabelPair&)>;

/// "oracle" or "checkpoint" per sample.mode.
ScoreFactory make_score_factory(const RunConfig& config, const ToyWorld& world,
                                const NoiseSchedule& schedule);

struct SweepCell {
  double w_desc = 0.0;
  double w_cont = 0.0;
  std::uint64_t seed = 0;
  double fad = 0.0;                 // Frechet distance to reference latents
  double kl = 0.0;                  // mean KL(reference posterior || generated posterior)
  double alignment = 0.0;           // mean cosine(posterior, requested one-hot)
  double content_error_rate = 0.0;  // MAP content label != requested
  double desc_error_rate = 0.0;
  double projection = 0.0;          // mean offset along the content direction
};

/// Reference draws from the world with labels cycling over every pair.
struct ReferenceSet {
  std::vector<LabelPair> labels;
  Matrix latents;  // rows
};
ReferenceSet draw_reference(const ToyWorld& world, int count, std::uint64_t seed);

SweepCell evaluate_cell(const ToyWorld& world, const NoiseSchedule& schedule,
                        const ScoreFactory& factory, SamplerOptions options, int count,
                        std::uint64_t seed, const ReferenceSet& reference);

/// Per-cell seed, a hash of (seed, w_desc, w_cont).
std::uint64_t cell_seed(std::uint64_t seed, double w_desc, double w_cont);

/// Mean ||eps_net - eps_oracle||^2 over `count` random (z_t, t, labels).
double oracle_mse(const ToyWorld& world, const NoiseSchedule& schedule, const NetConfig& config,
                  const Params& params, ConditionMask mask, int count, std::uint64_t seed);

// Each command writes into `out` (created if missing), starting with the
// effective configuration in config.txt, and reports progress on `log`.
void cmd_train(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void cmd_sample(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
std::vector<SweepCell> cmd_sweep(const RunConfig& config, const std::filesystem::path& out,
                                 std::ostream& log);
void cmd_curate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void cmd_eval(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
/// Returns whether the decomposition check passed.
bool cmd_oracle_check(const RunConfig& config, const std::filesystem::path& out,
                      std::ostream& log);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitRuntime = 2;

/// Parses arguments and dispatches; failures are reported as a JSON object
/// on `err` and mapped to an exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace duet::cli

#endif  // DUET_TOOLS_COMMANDS_HPP_
