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

#ifndef DUET_ORACLE_HPP_
#define DUET_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "duet/diffusion.hpp"
#include "duet/guidance.hpp"
#include "duet/random.hpp"
#include "duet/sampler.hpp"

namespace duet {

/// A description label and a content label.
struct LabelPair {
  int desc = 0;
  int cont = 0;
};

/// Labelled isotropic Gaussian mixture: component (a, b) has mean mu_ab,
/// covariance sigma^2 I and prior weight pi_ab. Because every component
/// shares one isotropic covariance, the VP-diffused mixture at step t is
/// again a mixture with means sqrt(a_t) mu_ab and variance
/// a_t sigma^2 + 1 - a_t, so every masked score is available in closed form.
class ToyWorld {
 public:
  /// mu_ab = desc_offsets[a] + cont_offsets[b], pi_ab = desc_prior[a] * cont_prior[b].
  /// With desc and content offsets in orthogonal subspaces the two labels
  /// are conditionally independent given z at every noise level.
  static ToyWorld from_offsets(const std::vector<Vector>& desc_offsets,
                               const std::vector<Vector>& cont_offsets,
                               const std::vector<double>& desc_prior,
                               const std::vector<double>& cont_prior, double sigma);

  /// Arbitrary means and joint prior; priors are normalized to sum to one.
  static ToyWorld from_components(std::vector<std::vector<Vector>> means,
                                  const Matrix& joint_prior, double sigma);

  /// d = 2, 3 x 3 labels, means on the grid {-1, 0, 1}^2, uniform prior, sigma = 0.3.
  static ToyWorld standard();

  /// Same means as standard() but with the joint prior concentrated on the
  /// diagonal a == b, which couples the labels beyond what z explains.
  static ToyWorld correlated();

  int dim() const { return static_cast<int>(means_[0][0].size()); }
  int desc_labels() const { return static_cast<int>(means_.size()); }
  int cont_labels() const { return static_cast<int>(means_[0].size()); }
  double sigma() const { return sigma_; }

  const Vector& mean(int a, int b) const;
  double prior(int a, int b) const;
  const Matrix& joint_prior() const { return prior_; }

  /// E[z_0 | a], E[z_0 | b] and E[z_0].
  Vector desc_mean(int a) const;
  Vector cont_mean(int b) const;
  Vector marginal_mean() const;

  void check_labels(const LabelPair& labels) const;

  /// Conditions handed to a learned network for this world.
  Vector desc_embedding(int a, int d_desc) const;
  std::vector<int> content_tokens(int b) const;
  int vocab_size() const { return 2 * cont_labels() + 1; }

  LabelPair sample_labels(Rng& rng) const;
  Latent sample_clean(Rng& rng, const LabelPair& labels) const;

 private:
  ToyWorld(std::vector<std::vector<Vector>> means, Matrix prior, double sigma);

  std::vector<std::vector<Vector>> means_;
  Matrix prior_;
  double sigma_;
};

/// Exact epsilon-form score of the diffused world at step t under `mask`:
/// (a, b), (a, null), (null, b) or (null, null).
NoisePrediction diffused_score(const ToyWorld& world, const Latent& z, int t,
                               const NoiseSchedule& schedule, const LabelPair& labels,
                               ConditionMask mask);

/// log p_t(z | masked labels), including normalization.
double diffused_log_density(const ToyWorld& world, const Latent& z, int t,
                            const NoiseSchedule& schedule, const LabelPair& labels,
                            ConditionMask mask);

/// Posterior over label pairs given a diffused latent; rows index desc labels.
Matrix label_posterior(const ToyWorld& world, const Latent& z, int t,
                       const NoiseSchedule& schedule);

/// Same as label_posterior for a clean latent (step kCleanStep).
Matrix clean_label_posterior(const ToyWorld& world, const Latent& z0);

/// Binds the exact scores of `world` for one label pair as a sampler input.
GuidedScoreFn oracle_score_fn(const ToyWorld& world, const NoiseSchedule& schedule,
                              LabelPair labels);

struct DecompositionSample {
  Vector z;
  int t = 0;
  LabelPair labels;
};

struct DecompositionReport {
  int samples = 0;
  double tolerance = 0.0;
  /// max |eps(a,b) - eps(0) - [eps(a) - eps(0)] - [eps(b) - eps(0)]|_inf
  double max_identity_deviation = 0.0;
  /// max |dual(w, w) - unified(w)|_inf over the checked weights.
  double max_combine_deviation = 0.0;
  DecompositionSample worst;
  bool passed = false;

  double max_deviation() const { return std::max(max_identity_deviation, max_combine_deviation); }
};

/// Checks the two-condition score decomposition on `samples` random
/// (z, t, a, b) draws and that dual guidance with equal weights equals
/// single-weight guidance. Throws InvalidRangeError if tol <= 0.
DecompositionReport verify_score_decomposition(const ToyWorld& world,
                                                  const NoiseSchedule& schedule, int samples,
                                                  double tol, std::uint64_t seed);

}  // namespace duet

#endif  // DUET_ORACLE_HPP_
