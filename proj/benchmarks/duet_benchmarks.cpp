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

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "duet/audio.hpp"
#include "duet/metrics.hpp"
#include "duet/oracle.hpp"
#include "duet/sampler.hpp"
#include "duet/scorenet.hpp"
#include "duet/trainer.hpp"

namespace {

using namespace duet;

const NoiseSchedule& schedule() {
  static const NoiseSchedule s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  return s;
}

NetConfig net_config(const ToyWorld& world) {
  NetConfig c;
  c.d = world.dim();
  c.d_desc = world.desc_labels();
  c.vocab_size = world.vocab_size();
  return c;
}

ConditionPair conditions(const ToyWorld& world, const NetConfig& c, LabelPair lp) {
  return ConditionPair::make(world.desc_embedding(lp.desc, c.d_desc), world.content_tokens(lp.cont));
}

void BM_DiffusedScore(benchmark::State& state) {
  const ToyWorld world = ToyWorld::standard();
  Rng rng(1);
  const Latent z{standard_normal(rng, world.dim())};
  for (auto _ : state)
    benchmark::DoNotOptimize(diffused_score(world, z, 500, schedule(), {1, 2}, ConditionMask::kFull));
}
BENCHMARK(BM_DiffusedScore);

void BM_PredictNoise(benchmark::State& state) {
  const ToyWorld world = ToyWorld::standard();
  const NetConfig c = net_config(world);
  const Params p = Params::init(c);
  Rng rng(2);
  const Latent z{standard_normal(rng, c.d)};
  const ConditionPair cond = conditions(world, c, {0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(predict_noise(c, p, z, 500, cond));
}
BENCHMARK(BM_PredictNoise);

// Oracle-score DDIM chain; the argument is the number of sampling steps.
void BM_DdimSample(benchmark::State& state) {
  const ToyWorld world = ToyWorld::standard();
  const auto fn = oracle_score_fn(world, schedule(), {2, 0});
  SamplerOptions opts;
  opts.n_steps = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample(fn, schedule(), world.dim(), opts, seed++));
}
BENCHMARK(BM_DdimSample)->Arg(10)->Arg(100);

void BM_TrainingStep(benchmark::State& state) {
  const ToyWorld world = ToyWorld::standard();
  const NetConfig c = net_config(world);
  Trainer trainer(c, schedule(), {}, 3);
  Rng rng(4);
  std::vector<TrainingExample> batch(static_cast<std::size_t>(state.range(0)));
  for (auto& ex : batch) {
    const LabelPair lp = world.sample_labels(rng);
    ex.z0 = world.sample_clean(rng, lp);
    ex.conditions = conditions(world, c, lp);
  }
  for (auto _ : state) benchmark::DoNotOptimize(trainer.training_step(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainingStep)->Arg(64);

void BM_Wer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ref(n), hyp(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref[i] = "w" + std::to_string(i % 17);
    hyp[i] = "w" + std::to_string((i * 7) % 17);
  }
  for (auto _ : state) benchmark::DoNotOptimize(edit_distance(ref, hyp));
}
BENCHMARK(BM_Wer)->Arg(16)->Arg(256);

void BM_Frechet(benchmark::State& state) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  Rng rng(5);
  Matrix a(4 * k, k), b(4 * k, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = std::normal_distribution<double>()(rng);
    b.data()[i] = std::normal_distribution<double>()(rng);
  }
  const EmbeddingSet sa = EmbeddingSet::from_vectors(a), sb = EmbeddingSet::from_vectors(b);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(sa, sb));
}
BENCHMARK(BM_Frechet)->Arg(8)->Arg(64);

void BM_Resample(benchmark::State& state) {
  std::vector<double> x(44100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(resample(x, 44100, kTargetRate));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Resample);

}  // namespace

BENCHMARK_MAIN();
