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

#ifndef DUET_DIFFUSION_HPP_
#define DUET_DIFFUSION_HPP_

#include <Eigen/Core>

#include "duet/schedule.hpp"

namespace duet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in latent space, clean (z_0) or noised (z_t).
struct Latent {
  Vector values;

  Eigen::Index dim() const { return values.size(); }
};

/// The noise-prediction output epsilon-hat for one latent.
struct NoisePrediction {
  Vector values;

  Eigen::Index dim() const { return values.size(); }
};

/// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.
Latent forward_diffuse(const Latent& z0, int t, const NoisePrediction& eps,
                       const NoiseSchedule& schedule);

/// Converts an epsilon prediction into the score grad log p_t(z):
///   score = -eps / sqrt(1 - alpha_bar_t).
Vector noise_to_score(const NoisePrediction& eps, int t, const NoiseSchedule& schedule);
NoisePrediction score_to_noise(const Vector& score, int t, const NoiseSchedule& schedule);

/// Clean-sample estimate (z_t - sqrt(1 - a_t) eps) / sqrt(a_t).
Latent predict_clean(const Latent& z_t, const NoisePrediction& eps_hat, int t,
                     const NoiseSchedule& schedule);

/// One DDIM update from step t to t_prev (t_prev may be kCleanStep).
///
/// With eta = 0 the update is deterministic and `fresh_noise` is ignored.
/// With eta > 0, `fresh_noise` must be a standard-normal draw of the
/// latent dimension.
Latent ddim_step(const Latent& z_t, const NoisePrediction& eps_hat, int t, int t_prev,
                 const NoiseSchedule& schedule, double eta,
                 const Vector& fresh_noise = Vector());

}  // namespace duet

#endif  // DUET_DIFFUSION_HPP_
