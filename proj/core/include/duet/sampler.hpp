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

#ifndef DUET_SAMPLER_HPP_
#define DUET_SAMPLER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "duet/diffusion.hpp"
#include "duet/guidance.hpp"

namespace duet {

/// A noise predictor with its conditions already bound; the mask selects
/// which of them are replaced by null for this evaluation.
using GuidedScoreFn =
    std::function<NoisePrediction(const Latent& z_t, int t, ConditionMask mask)>;

struct SamplerOptions {
  int n_steps = 100;
  double eta = 0.0;
  GuidanceWeights weights = GuidanceWeights::joint();
};

/// Evaluates the masks needed for dual guidance at (z_t, t) and combines
/// them. Masks whose weight is zero are not evaluated.
NoisePrediction guided_noise(const GuidedScoreFn& score_fn, const Latent& z_t, int t,
                             const GuidanceWeights& weights);

/// Runs the DDIM chain from a given z_T. `rng` is only drawn from when eta > 0.
Latent run_chain(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule,
                 Latent z_T, const SamplerOptions& options, std::uint64_t noise_seed);

/// Draws z_T ~ N(0, I) from `seed` and denoises it to a z_0 estimate.
/// Identical inputs give bit-identical output.
Latent sample(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule, Eigen::Index dim,
              const SamplerOptions& options, std::uint64_t seed);

/// `count` independent chains; chain i uses derive_seed(seed, {i}).
std::vector<Latent> sample_many(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule,
                                Eigen::Index dim, const SamplerOptions& options,
                                std::uint64_t seed, int count);

}  // namespace duet

#endif  // DUET_SAMPLER_HPP_
