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

#include "duet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duet/error.hpp"

namespace duet {
namespace {

struct Component {
  const Vector* mean;
  double log_weight;
};

// Components of the masked mixture and their (unnormalized) log weights.
std::vector<Component> masked_components(const ToyWorld& world, const LabelPair& labels,
                                         ConditionMask mask) {
  std::vector<Component> comps;
  for (int a = 0; a < world.desc_labels(); ++a) {
    if (keeps_desc(mask) && a != labels.desc) continue;
    for (int b = 0; b < world.cont_labels(); ++b) {
      if (keeps_cont(mask) && b != labels.cont) continue;
      comps.push_back({&world.mean(a, b), std::log(world.prior(a, b))});
    }
  }
  return comps;
}

struct DiffusedMoments {
  double mean_scale;  // sqrt(alpha_bar)
  double variance;    // alpha_bar sigma^2 + 1 - alpha_bar
};

DiffusedMoments moments(const ToyWorld& world, int t, const NoiseSchedule& schedule) {
  const double a = schedule.alpha_bar(t);
  return {std::sqrt(a), a * world.sigma() * world.sigma() + (1.0 - a)};
}

// Normalized responsibilities of each component for z, plus log-sum-exp.
std::vector<double> responsibilities(const std::vector<Component>& comps, const Vector& z,
                                     const DiffusedMoments& m, double* log_norm) {
  std::vector<double> logits(comps.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < comps.size(); ++k) {
    const double sq = (z - m.mean_scale * *comps[k].mean).squaredNorm();
    logits[k] = comps[k].log_weight - 0.5 * sq / m.variance;
    max_logit = std::max(max_logit, logits[k]);
  }
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    total += l;
  }
  for (double& l : logits) l /= total;
  if (log_norm != nullptr) *log_norm = max_logit + std::log(total);
  return logits;
}

}  // namespace

ToyWorld::ToyWorld(std::vector<std::vector<Vector>> means, Matrix prior, double sigma)
    : means_(std::move(means)), prior_(std::move(prior)), sigma_(sigma) {}

ToyWorld ToyWorld::from_offsets(const std::vector<Vector>& desc_offsets,
                                const std::vector<Vector>& cont_offsets,
                                const std::vector<double>& desc_prior,
                                const std::vector<double>& cont_prior, double sigma) {
  if (desc_offsets.empty() || cont_offsets.empty()) {
    throw InvalidRangeError("world needs at least one label of each kind");
  }
  if (desc_prior.size() != desc_offsets.size() || cont_prior.size() != cont_offsets.size()) {
    throw DimensionMismatchError("world prior length must match label count");
  }
  std::vector<std::vector<Vector>> means(desc_offsets.size());
  Matrix prior(static_cast<Eigen::Index>(desc_offsets.size()),
               static_cast<Eigen::Index>(cont_offsets.size()));
  for (size_t a = 0; a < desc_offsets.size(); ++a) {
    for (size_t b = 0; b < cont_offsets.size(); ++b) {
      if (desc_offsets[a].size() != cont_offsets[b].size()) {
        throw DimensionMismatchError("world offsets must share one dimension");
      }
      means[a].push_back(desc_offsets[a] + cont_offsets[b]);
      prior(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          desc_prior[a] * cont_prior[b];
    }
  }
  return from_components(std::move(means), prior, sigma);
}

ToyWorld ToyWorld::from_components(std::vector<std::vector<Vector>> means,
                                   const Matrix& joint_prior, double sigma) {
  if (means.empty() || means[0].empty()) {
    throw InvalidRangeError("world needs at least one label of each kind");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidRangeError("world sigma must be positive");
  }
  const auto n_desc = static_cast<Eigen::Index>(means.size());
  const auto n_cont = static_cast<Eigen::Index>(means[0].size());
  if (joint_prior.rows() != n_desc || joint_prior.cols() != n_cont) {
    throw DimensionMismatchError("joint prior shape must be desc_labels x cont_labels");
  }
  const auto d = means[0][0].size();
  if (d < 1) throw InvalidRangeError("world dimension must be >= 1");
  for (const auto& row : means) {
    if (static_cast<Eigen::Index>(row.size()) != n_cont) {
      throw DimensionMismatchError("every description label needs one mean per content label");
    }
    for (const auto& m : row) {
      if (m.size() != d) throw DimensionMismatchError("world means must share one dimension");
      if (!m.allFinite()) throw InvalidRangeError("world means must be finite");
    }
  }
  if ((joint_prior.array() <= 0.0).any() || !joint_prior.allFinite()) {
    throw InvalidRangeError("world priors must be positive");
  }
  return ToyWorld(std::move(means), joint_prior / joint_prior.sum(), sigma);
}

ToyWorld ToyWorld::standard() {
  std::vector<Vector> desc(3, Vector::Zero(2));
  std::vector<Vector> cont(3, Vector::Zero(2));
  for (int i = 0; i < 3; ++i) {
    desc[i][0] = i - 1.0;
    cont[i][1] = i - 1.0;
  }
  const std::vector<double> uniform(3, 1.0 / 3.0);
  return from_offsets(desc, cont, uniform, uniform, 0.3);
}

ToyWorld ToyWorld::correlated() {
  const ToyWorld base = standard();
  Matrix prior(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) prior(a, b) = a == b ? 0.3 : 0.1 / 6.0;
  }
  return from_components(base.means_, prior, base.sigma());
}

const Vector& ToyWorld::mean(int a, int b) const {
  check_labels({a, b});
  return means_[static_cast<size_t>(a)][static_cast<size_t>(b)];
}

double ToyWorld::prior(int a, int b) const {
  check_labels({a, b});
  return prior_(a, b);
}

Vector ToyWorld::desc_mean(int a) const {
  check_labels({a, 0});
  Vector acc = Vector::Zero(dim());
  const double total = prior_.row(a).sum();
  for (int b = 0; b < cont_labels(); ++b) acc += prior_(a, b) / total * mean(a, b);
  return acc;
}

Vector ToyWorld::cont_mean(int b) const {
  check_labels({0, b});
  Vector acc = Vector::Zero(dim());
  const double total = prior_.col(b).sum();
  for (int a = 0; a < desc_labels(); ++a) acc += prior_(a, b) / total * mean(a, b);
  return acc;
}

Vector ToyWorld::marginal_mean() const {
  Vector acc = Vector::Zero(dim());
  for (int a = 0; a < desc_labels(); ++a) {
    for (int b = 0; b < cont_labels(); ++b) acc += prior_(a, b) * mean(a, b);
  }
  return acc;
}

void ToyWorld::check_labels(const LabelPair& labels) const {
  if (labels.desc < 0 || labels.desc >= desc_labels()) {
    throw UnknownLabelError("unknown description label " + std::to_string(labels.desc));
  }
  if (labels.cont < 0 || labels.cont >= cont_labels()) {
    throw UnknownLabelError("unknown content label " + std::to_string(labels.cont));
  }
}

Vector ToyWorld::desc_embedding(int a, int d_desc) const {
  check_labels({a, 0});
  if (d_desc < desc_labels()) {
    throw DimensionMismatchError("description embedding needs at least one slot per label");
  }
  Vector e = Vector::Zero(d_desc);
  e[a] = 1.0;
  return e;
}

std::vector<int> ToyWorld::content_tokens(int b) const {
  check_labels({0, b});
  return {2 * b + 1, 2 * b + 2};
}

LabelPair ToyWorld::sample_labels(Rng& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double u = uniform(rng);
  for (int a = 0; a < desc_labels(); ++a) {
    for (int b = 0; b < cont_labels(); ++b) {
      u -= prior_(a, b);
      if (u < 0.0) return {a, b};
    }
  }
  return {desc_labels() - 1, cont_labels() - 1};
}

Latent ToyWorld::sample_clean(Rng& rng, const LabelPair& labels) const {
  return Latent{mean(labels.desc, labels.cont) + sigma_ * standard_normal(rng, dim())};
}

NoisePrediction diffused_score(const ToyWorld& world, const Latent& z, int t,
                               const NoiseSchedule& schedule, const LabelPair& labels,
                               ConditionMask mask) {
  world.check_labels(labels);
  if (z.dim() != world.dim()) {
    throw DimensionMismatchError("diffused_score: latent dimension does not match world");
  }
  const DiffusedMoments m = moments(world, t, schedule);
  const auto comps = masked_components(world, labels, mask);
  const auto resp = responsibilities(comps, z.values, m, nullptr);
  // grad log p = -sum_k r_k (z - s mu_k) / v; eps = -sqrt(1 - a) grad log p.
  Vector acc = Vector::Zero(z.dim());
  for (size_t k = 0; k < comps.size(); ++k) {
    acc += resp[k] * (z.values - m.mean_scale * *comps[k].mean);
  }
  const double a = schedule.alpha_bar(t);
  return NoisePrediction{std::sqrt(1.0 - a) / m.variance * acc};
}

double diffused_log_density(const ToyWorld& world, const Latent& z, int t,
                            const NoiseSchedule& schedule, const LabelPair& labels,
                            ConditionMask mask) {
  world.check_labels(labels);
  const DiffusedMoments m = moments(world, t, schedule);
  auto comps = masked_components(world, labels, mask);
  double total_weight = 0.0;
  for (const auto& c : comps) total_weight += std::exp(c.log_weight);
  double log_norm = 0.0;
  responsibilities(comps, z.values, m, &log_norm);
  const double d = static_cast<double>(z.dim());
  return log_norm - std::log(total_weight) -
         0.5 * d * std::log(2.0 * std::numbers::pi * m.variance);
}

namespace {

Matrix posterior_with_moments(const ToyWorld& world, const Vector& z, const DiffusedMoments& m) {
  const LabelPair any{0, 0};
  const auto comps = masked_components(world, any, ConditionMask::kNull);
  const auto resp = responsibilities(comps, z, m, nullptr);
  Matrix post(world.desc_labels(), world.cont_labels());
  size_t k = 0;
  for (int a = 0; a < world.desc_labels(); ++a) {
    for (int b = 0; b < world.cont_labels(); ++b) post(a, b) = resp[k++];
  }
  return post;
}

}  // namespace

Matrix label_posterior(const ToyWorld& world, const Latent& z, int t,
                       const NoiseSchedule& schedule) {
  return posterior_with_moments(world, z.values, moments(world, t, schedule));
}

Matrix clean_label_posterior(const ToyWorld& world, const Latent& z0) {
  return posterior_with_moments(world, z0.values, {1.0, world.sigma() * world.sigma()});
}

GuidedScoreFn oracle_score_fn(const ToyWorld& world, const NoiseSchedule& schedule,
                              LabelPair labels) {
  world.check_labels(labels);
  return [&world, &schedule, labels](const Latent& z, int t, ConditionMask mask) {
    return diffused_score(world, z, t, schedule, labels, mask);
  };
}

DecompositionReport verify_score_decomposition(const ToyWorld& world,
                                                  const NoiseSchedule& schedule, int samples,
                                                  double tol, std::uint64_t seed) {
  if (!(tol > 0.0)) throw InvalidRangeError("verify_score_decomposition: tol must be > 0");
  if (samples < 1) throw InvalidRangeError("verify_score_decomposition: samples must be >= 1");

  static constexpr double kWeights[] = {1.0, 7.0, 9.0};
  Rng rng(seed);
  std::uniform_int_distribution<int> step(0, schedule.steps() - 1);
  std::uniform_int_distribution<int> desc(0, world.desc_labels() - 1);
  std::uniform_int_distribution<int> cont(0, world.cont_labels() - 1);

  DecompositionReport report;
  report.samples = samples;
  report.tolerance = tol;
  double worst = -1.0;
  for (int i = 0; i < samples; ++i) {
    const int t = step(rng);
    const LabelPair labels{desc(rng), cont(rng)};
    // In-distribution latents, with every fourth draw widened to probe tails.
    const Latent z0 = world.sample_clean(rng, world.sample_labels(rng));
    Vector noise = standard_normal(rng, world.dim());
    if (i % 4 == 3) noise *= 2.0;
    const Latent z = forward_diffuse(z0, t, NoisePrediction{noise}, schedule);

    const auto full = diffused_score(world, z, t, schedule, labels, ConditionMask::kFull);
    const auto d_only = diffused_score(world, z, t, schedule, labels, ConditionMask::kDescOnly);
    const auto c_only = diffused_score(world, z, t, schedule, labels, ConditionMask::kContOnly);
    const auto null = diffused_score(world, z, t, schedule, labels, ConditionMask::kNull);

    const Vector lhs = full.values - null.values;
    const Vector rhs = (d_only.values - null.values) + (c_only.values - null.values);
    const double identity_dev = (lhs - rhs).lpNorm<Eigen::Infinity>();

    double combine_dev = 0.0;
    for (double w : kWeights) {
      const auto dual = dual_cfg_combine(full, d_only, c_only, null, GuidanceWeights(w, w));
      const auto unified = unified_cfg_combine(full, null, w);
      combine_dev = std::max(combine_dev, (dual.values - unified.values).lpNorm<Eigen::Infinity>());
    }
    report.max_identity_deviation = std::max(report.max_identity_deviation, identity_dev);
    report.max_combine_deviation = std::max(report.max_combine_deviation, combine_dev);
    const double sample_worst = std::max(identity_dev, combine_dev);
    if (sample_worst > worst) {
      worst = sample_worst;
      report.worst = {z.values, t, labels};
    }
  }
  report.passed = report.max_deviation() < tol;
  return report;
}

}  // namespace duet
