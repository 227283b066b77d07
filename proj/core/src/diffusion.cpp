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

#include "duet/diffusion.hpp"

#include <cmath>
#include <string>

#include "duet/error.hpp"

namespace duet {
namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionMismatchError(std::string(what) + ": dimension " + std::to_string(a) +
                                 " vs " + std::to_string(b));
  }
}

}  // namespace

Latent forward_diffuse(const Latent& z0, int t, const NoisePrediction& eps,
                       const NoiseSchedule& schedule) {
  require_same_dim(z0.dim(), eps.dim(), "forward_diffuse");
  if (t != kCleanStep) schedule.check_step(t);
  const double a = schedule.alpha_bar(t);
  return Latent{std::sqrt(a) * z0.values + std::sqrt(1.0 - a) * eps.values};
}

Vector noise_to_score(const NoisePrediction& eps, int t, const NoiseSchedule& schedule) {
  schedule.check_step(t);
  return -eps.values / std::sqrt(1.0 - schedule.alpha_bar(t));
}

NoisePrediction score_to_noise(const Vector& score, int t, const NoiseSchedule& schedule) {
  schedule.check_step(t);
  return NoisePrediction{-std::sqrt(1.0 - schedule.alpha_bar(t)) * score};
}

Latent predict_clean(const Latent& z_t, const NoisePrediction& eps_hat, int t,
                     const NoiseSchedule& schedule) {
  require_same_dim(z_t.dim(), eps_hat.dim(), "predict_clean");
  const double a = schedule.alpha_bar(t);
  return Latent{(z_t.values - std::sqrt(1.0 - a) * eps_hat.values) / std::sqrt(a)};
}

Latent ddim_step(const Latent& z_t, const NoisePrediction& eps_hat, int t, int t_prev,
                 const NoiseSchedule& schedule, double eta, const Vector& fresh_noise) {
  require_same_dim(z_t.dim(), eps_hat.dim(), "ddim_step");
  schedule.check_step(t);
  if (t_prev >= t || t_prev < kCleanStep) {
    throw TimestepError("ddim_step requires kCleanStep <= t_prev < t, got t=" +
                        std::to_string(t) + " t_prev=" + std::to_string(t_prev));
  }
  if (!(eta >= 0.0)) throw InvalidRangeError("ddim_step: eta must be non-negative");

  const double a_t = schedule.alpha_bar(t);
  const double a_prev = schedule.alpha_bar(t_prev);
  const Latent z0_hat = predict_clean(z_t, eps_hat, t, schedule);

  double sigma = 0.0;
  if (eta > 0.0) {
    require_same_dim(fresh_noise.size(), z_t.dim(), "ddim_step noise");
    sigma = eta * std::sqrt((1.0 - a_prev) / (1.0 - a_t)) * std::sqrt(1.0 - a_t / a_prev);
  }
  const double dir_coef = std::sqrt(std::max(0.0, 1.0 - a_prev - sigma * sigma));
  Vector next = std::sqrt(a_prev) * z0_hat.values + dir_coef * eps_hat.values;
  if (sigma > 0.0) next += sigma * fresh_noise;
  return Latent{std::move(next)};
}

}  // namespace duet
