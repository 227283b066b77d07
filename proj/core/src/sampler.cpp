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

#include "duet/sampler.hpp"

#include "duet/error.hpp"
#include "duet/random.hpp"

namespace duet {

NoisePrediction guided_noise(const GuidedScoreFn& score_fn, const Latent& z_t, int t,
                             const GuidanceWeights& weights) {
  NoisePrediction full = score_fn(z_t, t, ConditionMask::kFull);
  if (weights.desc() == 0.0 && weights.cont() == 0.0) return full;

  const NoisePrediction null = score_fn(z_t, t, ConditionMask::kNull);
  const NoisePrediction desc_only =
      weights.desc() != 0.0 ? score_fn(z_t, t, ConditionMask::kDescOnly) : null;
  const NoisePrediction cont_only =
      weights.cont() != 0.0 ? score_fn(z_t, t, ConditionMask::kContOnly) : null;
  return dual_cfg_combine(full, desc_only, cont_only, null, weights);
}

Latent run_chain(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule, Latent z_T,
                 const SamplerOptions& options, std::uint64_t noise_seed) {
  const std::vector<int> steps = sampling_timesteps(schedule, options.n_steps);
  Rng rng(noise_seed);
  Latent z = std::move(z_T);
  for (size_t i = 0; i < steps.size(); ++i) {
    const int t = steps[i];
    const int t_prev = i + 1 < steps.size() ? steps[i + 1] : kCleanStep;
    const NoisePrediction eps = guided_noise(score_fn, z, t, options.weights);
    if (!eps.values.allFinite()) {
      throw NumericError("non-finite noise prediction at t=" + std::to_string(t));
    }
    if (options.eta > 0.0) {
      z = ddim_step(z, eps, t, t_prev, schedule, options.eta, standard_normal(rng, z.dim()));
    } else {
      z = ddim_step(z, eps, t, t_prev, schedule, 0.0);
    }
  }
  return z;
}

Latent sample(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule, Eigen::Index dim,
              const SamplerOptions& options, std::uint64_t seed) {
  if (dim < 1) throw InvalidRangeError("sample: latent dimension must be >= 1");
  Rng rng(seed);
  Latent z_T{standard_normal(rng, dim)};
  return run_chain(score_fn, schedule, std::move(z_T), options, derive_seed(seed, {0x6e6f697365ULL}));
}

std::vector<Latent> sample_many(const GuidedScoreFn& score_fn, const NoiseSchedule& schedule,
                                Eigen::Index dim, const SamplerOptions& options,
                                std::uint64_t seed, int count) {
  if (count < 0) throw InvalidRangeError("sample_many: negative count");
  std::vector<Latent> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sample(score_fn, schedule, dim, options,
                         derive_seed(seed, {static_cast<std::uint64_t>(i)})));
  }
  return out;
}

}  // namespace duet
