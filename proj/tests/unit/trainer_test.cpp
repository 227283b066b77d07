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

#include <array>
#include <cmath>

#include "duet/error.hpp"
#include "duet/oracle.hpp"
#include "duet/trainer.hpp"

namespace duet {
namespace {

bool params_equal(const Params& a, const Params& b) {
  bool same = true;
  std::vector<Eigen::ArrayXd> flat_a, flat_b;
  a.for_each([&](const char*, const auto& t) { flat_a.emplace_back(t.reshaped().array()); });
  b.for_each([&](const char*, const auto& t) { flat_b.emplace_back(t.reshaped().array()); });
  if (flat_a.size() != flat_b.size()) return false;
  for (std::size_t i = 0; i < flat_a.size(); ++i)
    same = same && flat_a[i].size() == flat_b[i].size() && (flat_a[i] == flat_b[i]).all();
  return same;
}

std::vector<TrainingExample> world_batch(const ToyWorld& w, const NetConfig& cfg, Rng& rng, int n) {
  std::vector<TrainingExample> out;
  for (int i = 0; i < n; ++i) {
    const LabelPair lp = w.sample_labels(rng);
    out.push_back({w.sample_clean(rng, lp),
                   ConditionPair::make(w.desc_embedding(lp.desc, cfg.d_desc), w.content_tokens(lp.cont))});
  }
  return out;
}

NetConfig small() {
  NetConfig c;
  c.d_model = 16;
  c.layers = 1;
  return c;
}

TEST(Dropout, MaskFrequenciesAtDefaultRate) {
  EXPECT_EQ(TrainerOptions{}.dropout_p, 0.1);
  Rng rng(2024);
  std::array<int, 4> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(draw_dropout_mask(rng, 0.1))];
  const std::array<double, 4> expected{0.81, 0.09, 0.09, 0.01};
  for (std::size_t k = 0; k < 4; ++k) {
    const double sd = std::sqrt(n * expected[k] * (1 - expected[k]));
    EXPECT_NEAR(counts[static_cast<std::size_t>(kAllMasks[k])], n * expected[k], 3 * sd)
        << mask_name(kAllMasks[k]);
  }
}

TEST(Dropout, Extremes) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(draw_dropout_mask(rng, 0.0), ConditionMask::kFull);
    EXPECT_EQ(draw_dropout_mask(rng, 1.0), ConditionMask::kNull);
  }
}

TEST(Adam, FirstStepByHand) {
  NetConfig cfg = small();
  Params p = Params::init(cfg);
  Params g = Params::zeros_like(p);
  g.out_b[0] = 0.5;
  g.out_b[1] = -2.0;
  AdamState st = AdamState::for_params(p);
  AdamOptions o;
  o.learning_rate = 0.01;
  const Vector before = p.out_b;
  const Matrix w_before = p.out_w;
  adam_update(p, g, st, o);
  // Bias-corrected first step moves each coordinate by lr * g / (|g| + eps).
  EXPECT_NEAR(p.out_b[0], before[0] - 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p.out_b[1], before[1] + 0.01 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_EQ(p.out_w, w_before);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, DecoupledWeightDecay) {
  NetConfig cfg = small();
  Params p = Params::init(cfg);
  const Params g = Params::zeros_like(p);
  AdamState st = AdamState::for_params(p);
  AdamOptions o;
  o.learning_rate = 0.1;
  o.weight_decay = 0.5;
  const Matrix before = p.out_w;
  adam_update(p, g, st, o);
  EXPECT_LT((p.out_w - before * (1 - 0.1 * 0.5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Trainer, ZeroLearningRateLeavesParamsBitIdentical) {
  const NetConfig cfg = small();
  TrainerOptions opt;
  opt.adam.learning_rate = 0.0;
  Trainer tr(cfg, make_schedule(1000, 1e-4, 0.02), opt, 5);
  const Params before = tr.params();
  Rng rng(6);
  const ToyWorld w = ToyWorld::standard();
  for (int i = 0; i < 3; ++i) tr.training_step(world_batch(w, cfg, rng, 16));
  EXPECT_TRUE(params_equal(before, tr.params()));
  EXPECT_EQ(tr.steps_taken(), 3);
}

TEST(Trainer, DeterministicForSeed) {
  const NetConfig cfg = small();
  const ToyWorld w = ToyWorld::standard();
  auto run = [&] {
    TrainerOptions opt;
    opt.adam.learning_rate = 1e-3;
    Trainer tr(cfg, make_schedule(1000, 1e-4, 0.02), opt, 9);
    Rng rng(10);
    for (int i = 0; i < 5; ++i) tr.training_step(world_batch(w, cfg, rng, 8));
    return tr.params();
  };
  EXPECT_TRUE(params_equal(run(), run()));
}

TEST(Trainer, LossDecreasesFromInitialPlateau) {
  const NetConfig cfg = small();
  const ToyWorld w = ToyWorld::standard();
  TrainerOptions opt;
  opt.adam.learning_rate = 1e-3;
  Trainer tr(cfg, make_schedule(1000, 1e-4, 0.02), opt, 1);
  Rng rng(2);
  double first = 0, last = 0;
  for (int i = 0; i < 2000; ++i) {
    const double loss = tr.training_step(world_batch(w, cfg, rng, 32));
    if (i < 100) first += loss;
    if (i >= 1900) last += loss;
  }
  EXPECT_LT(last, 0.8 * first);
}

TEST(Trainer, NonFiniteLossThrowsAndKeepsParams) {
  const NetConfig cfg = small();
  Trainer tr(cfg, make_schedule(100, 1e-4, 0.02), {}, 3);
  const Params before = tr.params();
  NetInput in{Latent{Vector::Zero(2)}, 5, {}, NoisePrediction{Vector::Constant(2, std::nan(""))}};
  EXPECT_THROW(tr.step_on(std::span<const NetInput>(&in, 1)), NumericError);
  EXPECT_TRUE(params_equal(before, tr.params()));
  EXPECT_EQ(tr.steps_taken(), 0);
}

TEST(Trainer, EmptyBatchRejected) {
  Trainer tr(small(), make_schedule(100, 1e-4, 0.02), {}, 3);
  EXPECT_THROW(tr.training_step({}), InvalidRangeError);
}

}  // namespace
}  // namespace duet
