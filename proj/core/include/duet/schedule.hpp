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

#ifndef DUET_SCHEDULE_HPP_
#define DUET_SCHEDULE_HPP_

#include <span>
#include <vector>

namespace duet {

/// Timestep index meaning "fully denoised"; its cumulative alpha is 1.
inline constexpr int kCleanStep = -1;

/// Variance-preserving noise schedule: per-step betas and their cumulative
/// products alpha_bar[t] = prod_{s <= t} (1 - beta[s]).
class NoiseSchedule {
 public:
  /// Linearly spaced betas from beta_min to beta_max over `steps` entries.
  /// Throws InvalidRangeError unless steps >= 1 and
  /// 0 < beta_min <= beta_max < 1.
  static NoiseSchedule linear(int steps, double beta_min, double beta_max);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta_min() const { return betas_.front(); }
  double beta_max() const { return betas_.back(); }

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }

  /// alpha_bar at step t, with alpha_bar(kCleanStep) == 1.
  double alpha_bar(int t) const;

  /// Throws TimestepError if t is not a valid noisy step in [0, steps).
  void check_step(int t) const;

 private:
  NoiseSchedule(std::vector<double> betas, std::vector<double> alpha_bars)
      : betas_(std::move(betas)), alpha_bars_(std::move(alpha_bars)) {}

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

inline NoiseSchedule make_schedule(int steps, double beta_min, double beta_max) {
  return NoiseSchedule::linear(steps, beta_min, beta_max);
}

struct ScheduleDefaults {
  static constexpr int kSteps = 1000;
  static constexpr double kBetaMin = 1e-4;
  static constexpr double kBetaMax = 0.02;
};

/// Evenly spaced sampling timesteps, descending, always starting at
/// steps-1: t_i = floor((i + 1) * steps / n_steps) - 1 for i = n_steps-1..0.
std::vector<int> sampling_timesteps(const NoiseSchedule& schedule, int n_steps);

}  // namespace duet

#endif  // DUET_SCHEDULE_HPP_
