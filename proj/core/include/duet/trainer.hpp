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

#ifndef DUET_TRAINER_HPP_
#define DUET_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "duet/random.hpp"
#include "duet/schedule.hpp"
#include "duet/scorenet.hpp"

namespace duet {

struct AdamOptions {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled, as in AdamW
};

struct TrainerOptions {
  AdamOptions adam;
  double dropout_p = 0.1;
};

/// One clean training example: z_0 and its (undropped) conditions.
struct TrainingExample {
  Latent z0;
  ConditionPair conditions;
};

/// Drops each condition independently with probability p.
ConditionMask draw_dropout_mask(Rng& rng, double p);

/// Adam moment estimates, shaped like the parameters.
struct AdamState {
  Params first_moment;
  Params second_moment;
  std::int64_t step = 0;

  static AdamState for_params(const Params& params);
};

/// Applies one Adam update in place.
void adam_update(Params& params, const Params& grad, AdamState& state, const AdamOptions& options);

/// Owns parameters, optimizer state and the training RNG. Training is
/// single-threaded and a deterministic function of (config, seed, data).
class Trainer {
 public:
  Trainer(NetConfig config, NoiseSchedule schedule, TrainerOptions options, std::uint64_t seed);
  Trainer(NetConfig config, Params params, AdamState adam, NoiseSchedule schedule,
          TrainerOptions options, Rng rng);

  /// Samples t and eps per item, forms z_t, drops conditions independently
  /// with probability dropout_p, and takes one optimizer step on the mean
  /// squared noise-prediction error. Returns the loss before the update.
  /// Throws NumericError (parameters untouched) if the loss or the updated
  /// parameters are not finite.
  double training_step(std::span<const TrainingExample> batch);

  /// One optimizer step on an already-noised batch.
  double step_on(std::span<const NetInput> batch);

  const NetConfig& config() const { return config_; }
  const Params& params() const { return params_; }
  const AdamState& adam_state() const { return adam_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const TrainerOptions& options() const { return options_; }
  TrainerOptions& options() { return options_; }
  const Rng& rng() const { return rng_; }
  std::int64_t steps_taken() const { return adam_.step; }

 private:
  NetConfig config_;
  NoiseSchedule schedule_;
  TrainerOptions options_;
  Params params_;
  AdamState adam_;
  Rng rng_;
  Params grad_;
};

struct TensorGradError {
  std::string name;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::vector<TensorGradError> tensors;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Only tensors whose name starts with this prefix are checked.
  std::string name_prefix;
  /// Applied to the analytic gradient before comparison (mutation tests).
  std::function<void(Params&)> corrupt;
};

/// Compares the analytic gradient of noise_loss with central finite
/// differences for every parameter tensor. The per-tensor error is
/// ||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||), and 0
/// when both are exactly zero.
GradCheckReport grad_check(const NetConfig& config, const Params& params,
                           std::span<const NetInput> batch, const GradCheckOptions& options = {});

}  // namespace duet

#endif  // DUET_TRAINER_HPP_
