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

#include "duet/trainer.hpp"

#include <cmath>
#include <sstream>

#include "duet/diffusion.hpp"
#include "duet/error.hpp"

namespace duet {

ConditionMask draw_dropout_mask(Rng& rng, double p) {
  std::bernoulli_distribution drop(p);
  const bool drop_desc = drop(rng);
  const bool drop_cont = drop(rng);
  return make_mask(!drop_desc, !drop_cont);
}

AdamState AdamState::for_params(const Params& params) {
  return {Params::zeros_like(params), Params::zeros_like(params), 0};
}

void adam_update(Params& params, const Params& grad, AdamState& state, const AdamOptions& o) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));

  std::vector<Eigen::Map<Eigen::ArrayXd>> p_maps, m_maps, v_maps;
  std::vector<Eigen::Map<const Eigen::ArrayXd>> g_maps;
  auto collect = [](std::vector<Eigen::Map<Eigen::ArrayXd>>& out) {
    return [&out](const char*, auto& t) { out.emplace_back(t.data(), t.size()); };
  };
  params.for_each(collect(p_maps));
  grad.for_each([&g_maps](const char*, const auto& t) { g_maps.emplace_back(t.data(), t.size()); });
  state.first_moment.for_each(collect(m_maps));
  state.second_moment.for_each(collect(v_maps));

  for (size_t k = 0; k < p_maps.size(); ++k) {
    auto& p = p_maps[k];
    const auto& g = g_maps[k];
    m_maps[k] = o.beta1 * m_maps[k] + (1.0 - o.beta1) * g;
    v_maps[k] = o.beta2 * v_maps[k] + (1.0 - o.beta2) * g.square();
    if (o.learning_rate == 0.0) continue;
    if (o.weight_decay != 0.0) p -= o.learning_rate * o.weight_decay * p;
    p -= o.learning_rate * (m_maps[k] / bias1) / ((v_maps[k] / bias2).sqrt() + o.epsilon);
  }
}

Trainer::Trainer(NetConfig config, NoiseSchedule schedule, TrainerOptions options,
                 std::uint64_t seed)
    : Trainer(config, Params::init(config), AdamState{}, std::move(schedule), options,
              Rng(derive_seed(seed, {0x747261696eULL}))) {}

Trainer::Trainer(NetConfig config, Params params, AdamState adam, NoiseSchedule schedule,
                 TrainerOptions options, Rng rng)
    : config_(config),
      schedule_(std::move(schedule)),
      options_(options),
      params_(std::move(params)),
      adam_(std::move(adam)),
      rng_(rng),
      grad_(Params::zeros_like(params_)) {
  config_.validate();
  if (!(options_.dropout_p >= 0.0 && options_.dropout_p <= 1.0)) {
    throw InvalidRangeError("dropout probability must lie in [0, 1]");
  }
  if (!(options_.adam.learning_rate >= 0.0)) {
    throw InvalidRangeError("learning rate must be non-negative");
  }
  if (adam_.first_moment.blocks.size() != params_.blocks.size() ||
      adam_.first_moment.out_w.size() != params_.out_w.size()) {
    adam_ = AdamState::for_params(params_);
  }
}

double Trainer::training_step(std::span<const TrainingExample> batch) {
  if (batch.empty()) throw InvalidRangeError("training_step: empty batch");
  std::uniform_int_distribution<int> step_dist(0, schedule_.steps() - 1);
  std::vector<NetInput> noised;
  noised.reserve(batch.size());
  for (const TrainingExample& ex : batch) {
    NetInput in;
    in.t = step_dist(rng_);
    in.target = NoisePrediction{standard_normal(rng_, ex.z0.dim())};
    in.z_t = forward_diffuse(ex.z0, in.t, in.target, schedule_);
    in.conditions = ex.conditions.masked(draw_dropout_mask(rng_, options_.dropout_p));
    noised.push_back(std::move(in));
  }
  return step_on(noised);
}

double Trainer::step_on(std::span<const NetInput> batch) {
  const double loss = noise_loss(config_, params_, batch, &grad_);
  auto dump = [&](const std::string& what) {
    std::ostringstream os;
    os << what << " at optimizer step " << adam_.step + 1 << " (loss=" << loss
       << ", batch=" << batch.size() << ", t=[";
    for (size_t i = 0; i < batch.size() && i < 8; ++i) os << (i ? "," : "") << batch[i].t;
    os << (batch.size() > 8 ? ",..." : "") << "]); non-finite gradients in:";
    grad_.for_each([&os](const char* name, const auto& t) {
      if (!t.allFinite()) os << ' ' << name;
    });
    return os.str();
  };
  if (!std::isfinite(loss)) throw NumericError(dump("non-finite loss"));
  if (!grad_.all_finite()) throw NumericError(dump("non-finite gradient"));

  Params backup = params_;
  AdamState adam_backup = adam_;
  adam_update(params_, grad_, adam_, options_.adam);
  if (!params_.all_finite()) {
    params_ = std::move(backup);
    adam_ = std::move(adam_backup);
    throw NumericError(dump("non-finite parameters after update"));
  }
  return loss;
}

GradCheckReport grad_check(const NetConfig& config, const Params& params,
                           std::span<const NetInput> batch, const GradCheckOptions& options) {
  Params analytic = Params::zeros_like(params);
  noise_loss(config, params, batch, &analytic);
  if (options.corrupt) options.corrupt(analytic);

  Params probe = params;
  std::vector<Eigen::Map<Eigen::ArrayXd>> probe_maps;
  std::vector<std::string> names;
  probe.for_each([&](const char* name, auto& t) {
    probe_maps.emplace_back(t.data(), t.size());
    names.emplace_back(name);
  });
  std::vector<Eigen::Map<const Eigen::ArrayXd>> analytic_maps;
  analytic.for_each([&](const char*, const auto& t) { analytic_maps.emplace_back(t.data(), t.size()); });

  GradCheckReport report;
  for (size_t k = 0; k < probe_maps.size(); ++k) {
    if (!names[k].starts_with(options.name_prefix)) continue;
    auto& values = probe_maps[k];
    Eigen::ArrayXd numeric(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = noise_loss(config, probe, batch, nullptr);
      values[i] = saved - options.step;
      const double down = noise_loss(config, probe, batch, nullptr);
      values[i] = saved;
      numeric[i] = (up - down) / (2.0 * options.step);
    }
    const double diff = (analytic_maps[k] - numeric).matrix().norm();
    const double scale = std::max(analytic_maps[k].matrix().norm(), numeric.matrix().norm());
    const double rel = scale == 0.0 ? 0.0 : diff / scale;
    report.tensors.push_back({names[k], rel});
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_tensor = names[k];
    }
  }
  return report;
}

}  // namespace duet
