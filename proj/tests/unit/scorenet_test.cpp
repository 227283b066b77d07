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

#include "duet/error.hpp"
#include "duet/oracle.hpp"
#include "duet/scorenet.hpp"
#include "duet/trainer.hpp"

namespace duet {
namespace {

NetConfig small_config(std::uint64_t seed = 0) {
  NetConfig c;
  c.d_model = 8;
  c.layers = 1;
  c.seed = seed;
  return c;
}

std::vector<NetInput> random_batch(const NetConfig& cfg, int n, std::uint64_t seed) {
  const ToyWorld w = ToyWorld::standard();
  Rng rng(seed);
  std::vector<NetInput> batch;
  for (int i = 0; i < n; ++i) {
    const LabelPair lp = w.sample_labels(rng);
    const ConditionMask m = kAllMasks[static_cast<std::size_t>(i) % 4];
    batch.push_back({Latent{standard_normal(rng, cfg.d)}, 37 * i % 1000,
                     ConditionPair::make(w.desc_embedding(lp.desc, cfg.d_desc), w.content_tokens(lp.cont)).masked(m),
                     NoisePrediction{standard_normal(rng, cfg.d)}});
  }
  return batch;
}

TEST(NetConfig, Validate) {
  NetConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_frames = 3;
  EXPECT_THROW(c.validate(), InvalidRangeError);
  c = NetConfig{};
  c.d_model = 0;
  EXPECT_THROW(c.validate(), InvalidRangeError);
}

TEST(ConditionPair, EmptyContentIsNull) {
  const ConditionPair p = ConditionPair::make(Vector::Ones(3), {});
  EXPECT_TRUE(p.desc.has_value());
  EXPECT_FALSE(p.content.has_value());
  const ConditionPair q = ConditionPair::make(std::nullopt, {1, 2});
  EXPECT_FALSE(q.masked(ConditionMask::kNull).content.has_value());
  EXPECT_TRUE(q.masked(ConditionMask::kContOnly).content.has_value());
  EXPECT_FALSE(ConditionPair::make(Vector::Ones(3), {1}).masked(ConditionMask::kContOnly).desc.has_value());
}

TEST(PredictNoise, ShapeAndDeterminism) {
  const NetConfig cfg = small_config();
  const Params p = Params::init(cfg);
  const Latent z{Vector::LinSpaced(2, -0.3, 0.4)};
  const ConditionPair null;
  const auto a = predict_noise(cfg, p, z, 100, null);
  const auto b = predict_noise(cfg, p, z, 100, null);
  EXPECT_EQ(a.values.size(), cfg.d);
  EXPECT_EQ(a.values, b.values);
}

TEST(PredictNoise, TokenOrderMatters) {
  const NetConfig cfg = small_config(3);
  const Params p = Params::init(cfg);
  const Latent z{Vector::LinSpaced(2, -0.3, 0.4)};
  const auto a = predict_noise(cfg, p, z, 250, ConditionPair::make(std::nullopt, {1, 5}));
  const auto b = predict_noise(cfg, p, z, 250, ConditionPair::make(std::nullopt, {5, 1}));
  EXPECT_GT((a.values - b.values).norm(), 1e-9);
}

TEST(PredictNoise, ConditionsChangeOutput) {
  const NetConfig cfg = small_config(4);
  const Params p = Params::init(cfg);
  const Latent z{Vector::Ones(2)};
  const auto full = predict_noise(cfg, p, z, 10, ConditionPair::make(Vector::Unit(3, 0), {1, 2}));
  const auto null = predict_noise(cfg, p, z, 10, ConditionPair{});
  EXPECT_GT((full.values - null.values).norm(), 1e-9);
}

TEST(PredictNoise, RejectsBadInputs) {
  const NetConfig cfg = small_config();
  const Params p = Params::init(cfg);
  EXPECT_THROW(predict_noise(cfg, p, Latent{Vector::Zero(3)}, 1, {}), DimensionMismatchError);
  EXPECT_THROW(predict_noise(cfg, p, Latent{Vector::Zero(2)}, 1, ConditionPair::make(Vector::Zero(2), {})),
               DimensionMismatchError);
  EXPECT_THROW(predict_noise(cfg, p, Latent{Vector::Zero(2)}, -1, {}), TimestepError);
  EXPECT_THROW(predict_noise(cfg, p, Latent{Vector::Zero(2)}, 1, ConditionPair::make(std::nullopt, {9})),
               UnknownTokenError);
}

TEST(PredictNoise, BatchMatchesSingle) {
  const NetConfig cfg = small_config(5);
  const Params p = Params::init(cfg);
  const auto batch = random_batch(cfg, 12, 6);
  const Matrix out = predict_noise_batch(cfg, p, batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto single = predict_noise(cfg, p, batch[i].z_t, batch[i].t, batch[i].conditions);
    EXPECT_LT((out.col(static_cast<Eigen::Index>(i)) - single.values).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(NoiseLoss, IsBatchMeanSquaredError) {
  const NetConfig cfg = small_config(6);
  const Params p = Params::init(cfg);
  const auto batch = random_batch(cfg, 5, 7);
  double expect = 0;
  for (const auto& in : batch)
    expect += (in.target.values - predict_noise(cfg, p, in.z_t, in.t, in.conditions).values).squaredNorm();
  EXPECT_NEAR(noise_loss(cfg, p, batch, nullptr), expect / 5, 1e-12);
}

TEST(GradCheck, FullNetworkSeveralSeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const NetConfig cfg = small_config(seed);
    const Params p = Params::init(cfg);
    const auto report = grad_check(cfg, p, random_batch(cfg, 8, 100 + seed));
    EXPECT_LT(report.max_rel_error, 1e-4) << "seed " << seed << " worst " << report.worst_tensor;
    EXPECT_FALSE(report.tensors.empty());
  }
}

TEST(GradCheck, OutputHeadIsExact) {
  // The loss is quadratic in the output layer, so central differences are exact up to rounding.
  const NetConfig cfg = small_config(1);
  GradCheckOptions opt;
  opt.name_prefix = "output.";
  const auto report = grad_check(cfg, Params::init(cfg), random_batch(cfg, 6, 3), opt);
  ASSERT_EQ(report.tensors.size(), 2u);
  EXPECT_LT(report.max_rel_error, 1e-8);
}

TEST(GradCheck, DetectsCorruptedGradient) {
  const NetConfig cfg = small_config(2);
  GradCheckOptions opt;
  opt.corrupt = [](Params& g) { g.attn_v = -g.attn_v; };
  const auto report = grad_check(cfg, Params::init(cfg), random_batch(cfg, 8, 4), opt);
  EXPECT_GT(report.max_rel_error, 0.1);
  EXPECT_EQ(report.worst_tensor, "attn.v");
}

TEST(Params, CountsAndNames) {
  const NetConfig cfg = small_config();
  const Params p = Params::init(cfg);
  std::size_t n = 0;
  std::vector<std::string> names;
  p.for_each([&](const char* name, const auto& t) {
    n += static_cast<std::size_t>(t.size());
    names.emplace_back(name);
  });
  EXPECT_EQ(n, p.parameter_count());
  EXPECT_EQ(names.front(), "encoder.token_embedding");
  EXPECT_EQ(names.back(), "output.b");
  EXPECT_TRUE(p.all_finite());
  const Params z = Params::zeros_like(p);
  EXPECT_EQ(z.parameter_count(), n);
  EXPECT_EQ(z.out_w.norm(), 0.0);
}

}  // namespace
}  // namespace duet
