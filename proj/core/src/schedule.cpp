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

#include "duet/schedule.hpp"

#include <cmath>
#include <string>

#include "duet/error.hpp"

namespace duet {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_min, double beta_max) {
  if (steps < 1) {
    throw InvalidRangeError("schedule needs at least one step, got " +
                            std::to_string(steps));
  }
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0)) {
    throw InvalidRangeError("schedule betas must satisfy 0 < beta_min <= beta_max < 1");
  }
  std::vector<double> betas(static_cast<size_t>(steps));
  std::vector<double> alpha_bars(static_cast<size_t>(steps));
  double product = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    betas[t] = beta_min + (beta_max - beta_min) * frac;
    product *= 1.0 - betas[t];
    alpha_bars[t] = product;
  }
  return NoiseSchedule(std::move(betas), std::move(alpha_bars));
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t == kCleanStep) return 1.0;
  check_step(t);
  return alpha_bars_[static_cast<size_t>(t)];
}

void NoiseSchedule::check_step(int t) const {
  if (t < 0 || t >= steps()) {
    throw TimestepError("timestep " + std::to_string(t) + " outside [0, " +
                        std::to_string(steps()) + ")");
  }
}

std::vector<int> sampling_timesteps(const NoiseSchedule& schedule, int n_steps) {
  const int total = schedule.steps();
  if (n_steps < 1 || n_steps > total) {
    throw InvalidRangeError("n_steps must lie in [1, " + std::to_string(total) +
                            "], got " + std::to_string(n_steps));
  }
  std::vector<int> ts;
  ts.reserve(static_cast<size_t>(n_steps));
  for (int i = n_steps - 1; i >= 0; --i) {
    const long long t = (static_cast<long long>(i) + 1) * total / n_steps - 1;
    ts.push_back(static_cast<int>(t));
  }
  return ts;
}

}  // namespace duet
