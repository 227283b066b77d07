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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "duet/error.hpp"
#include "duet/oracle.hpp"
#include "duet/random.hpp"

namespace duet {
namespace {

// Brute-force log p_t(z | kept labels): explicit sum over the mixture
// components consistent with the mask, prior renormalized.
double brute_log_density(const ToyWorld& w, const Vector& z, int t, const NoiseSchedule& s,
                         LabelPair lp, ConditionMask mask) {
  const double a = s.alpha_bar(t);
  const double var = a * w.sigma() * w.sigma() + 1.0 - a;
  long double num = 0, den = 0;
  for (int i = 0; i < w.desc_labels(); ++i)
    for (int j = 0; j < w.cont_labels(); ++j) {
      if (keeps_desc(mask) && i != lp.desc) continue;
      if (keeps_cont(mask) && j != lp.cont) continue;
      const double r2 = (z - std::sqrt(a) * w.mean(i, j)).squaredNorm();
      const long double g = std::exp(-0.5L * r2 / var) / std::pow(2.0L * std::numbers::pi * var, z.size() / 2.0L);
      num += w.prior(i, j) * g;
      den += w.prior(i, j);
    }
  return static_cast<double>(std::log(num / den));
}

TEST(ToyWorld, StandardLayout) {
  const ToyWorld w = ToyWorld::standard();
  EXPECT_EQ(w.dim(), 2);
  EXPECT_EQ(w.desc_labels(), 3);
  EXPECT_EQ(w.cont_labels(), 3);
  EXPECT_EQ(w.sigma(), 0.3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      EXPECT_EQ(w.mean(a, b)[0], a - 1.0);
      EXPECT_EQ(w.mean(a, b)[1], b - 1.0);
      EXPECT_NEAR(w.prior(a, b), 1.0 / 9.0, 1e-15);
    }
  EXPECT_LT(w.marginal_mean().norm(), 1e-15);
  EXPECT_EQ(w.cont_mean(2)[1], 1.0);
  EXPECT_THROW(w.mean(3, 0), UnknownLabelError);
  EXPECT_THROW(w.check_labels({0, -1}), UnknownLabelError);
}

TEST(ToyWorld, NetworkConditions) {
  const ToyWorld w = ToyWorld::standard();
  const Vector e = w.desc_embedding(1, 3);
  EXPECT_EQ(e, Vector::Unit(3, 1));
  EXPECT_THROW(w.desc_embedding(0, 2), DimensionMismatchError);
  EXPECT_EQ(w.content_tokens(0), (std::vector<int>{1, 2}));
  EXPECT_EQ(w.content_tokens(2), (std::vector<int>{5, 6}));
  EXPECT_EQ(w.vocab_size(), 7);
}

TEST(DiffusedScore, SingleComponentClosedForm) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  Matrix prior(1, 1);
  prior << 1.0;
  const Vector mu = Vector::LinSpaced(3, -1, 2);
  const ToyWorld w = ToyWorld::from_components({{mu}}, prior, 0.5);
  const Vector z = Vector::Constant(3, 0.3);
  for (int t : {0, 250, 999}) {
    const double a = s.alpha_bar(t), var = a * 0.25 + 1 - a;
    const Vector score = -(z - std::sqrt(a) * mu) / var;
    const Vector eps = -std::sqrt(1 - a) * score;
    for (ConditionMask m : kAllMasks)
      EXPECT_LT((diffused_score(w, Latent{z}, t, s, {0, 0}, m).values - eps).norm(), 1e-13);
  }
}

TEST(DiffusedScore, SymmetricPairVanishesAtOrigin) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  const Vector mu = Vector::Constant(2, 0.8);
  const ToyWorld w = ToyWorld::from_offsets({Vector::Zero(2)}, {mu, -mu}, {1.0}, {0.5, 0.5}, 0.3);
  const auto e = diffused_score(w, Latent{Vector::Zero(2)}, 300, s, {0, 0}, ConditionMask::kNull);
  EXPECT_LT(e.values.norm(), 1e-15);
}

TEST(DiffusedScore, MatchesFiniteDifferenceOfBruteForceDensity) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  for (const ToyWorld& w : {ToyWorld::standard(), ToyWorld::correlated()}) {
    Rng rng(17);
    std::uniform_int_distribution<int> step(0, 999), label(0, 2);
    for (int trial = 0; trial < 40; ++trial) {
      const Vector z = 1.5 * standard_normal(rng, 2);
      const int t = step(rng);
      const LabelPair lp{label(rng), label(rng)};
      for (ConditionMask m : kAllMasks) {
        const double h = 1e-5;
        Vector grad(2);
        for (int k = 0; k < 2; ++k) {
          Vector zp = z, zm = z;
          zp[k] += h;
          zm[k] -= h;
          grad[k] = (brute_log_density(w, zp, t, s, lp, m) - brute_log_density(w, zm, t, s, lp, m)) / (2 * h);
        }
        const Vector eps_fd = -std::sqrt(1 - s.alpha_bar(t)) * grad;
        const Vector eps = diffused_score(w, Latent{z}, t, s, lp, m).values;
        EXPECT_LT((eps - eps_fd).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t << " mask=" << mask_name(m);
        EXPECT_NEAR(diffused_log_density(w, Latent{z}, t, s, lp, m), brute_log_density(w, z, t, s, lp, m), 1e-10);
      }
    }
  }
}

TEST(LabelPosterior, SumsToOneAndConcentrates) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  const ToyWorld w = ToyWorld::standard();
  Rng rng(1);
  const Matrix p = label_posterior(w, Latent{standard_normal(rng, 2)}, 500, s);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_TRUE((p.array() >= 0).all());
  const Matrix clean = clean_label_posterior(w, Latent{w.mean(2, 0)});
  EXPECT_GT(clean(2, 0), 0.99);
}

TEST(Decomposition, SingleComponentIsExact) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  Matrix prior(1, 1);
  prior << 1.0;
  const ToyWorld w = ToyWorld::from_components({{Vector::Ones(2)}}, prior, 0.3);
  const auto r = verify_score_decomposition(w, s, 200, 1e-9, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.max_identity_deviation, 0.0);
}

TEST(Decomposition, IndependentTwoByTwoWorld) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  const ToyWorld w = ToyWorld::from_offsets({Vector::Unit(2, 0), -Vector::Unit(2, 0)},
                                            {Vector::Unit(2, 1), -Vector::Unit(2, 1)}, {0.3, 0.7},
                                            {0.6, 0.4}, 0.4);
  const auto r = verify_score_decomposition(w, s, 500, 1e-9, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_deviation(), 1e-9);
}

TEST(Decomposition, CorrelatedWorldIsDetected) {
  const auto s = make_schedule(1000, 1e-4, 0.02);
  const auto r = verify_score_decomposition(ToyWorld::correlated(), s, 500, 1e-9, 3);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_identity_deviation, 1e-3);
}

TEST(Decomposition, RejectsBadTolerance) {
  const auto s = make_schedule(10, 1e-4, 0.02);
  EXPECT_THROW(verify_score_decomposition(ToyWorld::standard(), s, 10, 0.0, 1), InvalidRangeError);
}

TEST(ToyWorld, SampleCleanStatistics) {
  const ToyWorld w = ToyWorld::standard();
  Rng rng(8);
  Vector sum = Vector::Zero(2);
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += w.sample_clean(rng, {0, 2}).values;
  const Vector mean = sum / n;
  const double se = 0.3 / std::sqrt(n);
  EXPECT_NEAR(mean[0], -1.0, 4 * se);
  EXPECT_NEAR(mean[1], 1.0, 4 * se);
}

TEST(ToyWorld, RejectsInvalidConstruction) {
  Matrix prior(1, 1);
  prior << 0.0;
  EXPECT_THROW(ToyWorld::from_components({{Vector::Ones(2)}}, prior, 0.3), InvalidRangeError);
  prior << 1.0;
  EXPECT_THROW(ToyWorld::from_components({{Vector::Ones(2)}}, prior, 0.0), InvalidRangeError);
}

}  // namespace
}  // namespace duet
