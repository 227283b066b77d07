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

#ifndef DUET_SCORENET_HPP_
#define DUET_SCORENET_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duet/diffusion.hpp"
#include "duet/durator.hpp"
#include "duet/guidance.hpp"
#include "duet/sampler.hpp"

namespace duet {

struct NetConfig {
  int d = 2;                  // latent dimension
  int d_desc = 3;             // description-condition width
  int d_model = 32;           // hidden width, also the content width D
  int n_cont_tokens_max = 4;  // longest accepted content sequence L
  int layers = 2;             // residual trunk blocks after cross-attention
  int vocab_size = 7;
  int n_frames = 8;           // content frame budget N
  std::uint64_t seed = 0;

  /// Throws InvalidRangeError if any dimension is < 1 or N < L_max.
  void validate() const;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

struct TrunkBlock {
  Matrix w1;  // D x D
  Vector b1;
  Matrix w2;  // D x D
  Vector b2;
};

/// Every trainable tensor of the noise predictor, including the content
/// encoder, the duration predictor and the two learned null conditions.
struct Params {
  EncoderWeights encoder;
  Vector null_desc;  // d_desc
  Matrix null_cont;  // 1 x D, the null content sequence
  Matrix cond_w1;    // D x (D + d_desc), input is [timestep emb; c_desc]
  Vector cond_b1;
  Matrix cond_w2;  // D x D
  Vector cond_b2;
  Matrix in_w;  // D x d
  Vector in_b;
  Matrix attn_q;  // D x D
  Matrix attn_k;
  Matrix attn_v;
  Matrix attn_o;
  std::vector<TrunkBlock> blocks;
  Matrix out_w;  // d x D
  Vector out_b;

  static Params init(const NetConfig& config);
  /// Same shapes, all zero.
  static Params zeros_like(const Params& other);

  /// Calls f(name, tensor) for every tensor in a fixed order.
  template <typename F>
  void for_each(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each(F&& f) const { visit(*this, f); }

  bool all_finite() const;
  std::size_t parameter_count() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    self.encoder.for_each(f);
    f("null_desc", self.null_desc);
    f("null_cont", self.null_cont);
    f("cond.w1", self.cond_w1);
    f("cond.b1", self.cond_b1);
    f("cond.w2", self.cond_w2);
    f("cond.b2", self.cond_b2);
    f("input.w", self.in_w);
    f("input.b", self.in_b);
    f("attn.q", self.attn_q);
    f("attn.k", self.attn_k);
    f("attn.v", self.attn_v);
    f("attn.o", self.attn_o);
    for (size_t i = 0; i < self.blocks.size(); ++i) {
      const std::string p = "block" + std::to_string(i) + ".";
      f((p + "w1").c_str(), self.blocks[i].w1);
      f((p + "b1").c_str(), self.blocks[i].b1);
      f((p + "w2").c_str(), self.blocks[i].w2);
      f((p + "b2").c_str(), self.blocks[i].b2);
    }
    f("output.w", self.out_w);
    f("output.b", self.out_b);
  }
};

/// The two conditions for one latent. An absent value means "null" and is
/// replaced by the learned null embedding. Content is carried as token ids;
/// the network's durator turns them into the N x D content sequence.
struct ConditionPair {
  std::optional<Vector> desc;
  std::optional<std::vector<int>> content;

  /// An empty content prompt is the null content condition.
  static ConditionPair make(std::optional<Vector> desc, std::vector<int> content_tokens);

  /// Drops the conditions that `mask` does not keep.
  ConditionPair masked(ConditionMask mask) const;
};

/// One row of a noise-prediction batch. `target` is only read by the loss.
struct NetInput {
  Latent z_t;
  int t = 0;
  ConditionPair conditions;
  NoisePrediction target;
};

/// Deterministic forward pass for a single latent. Throws
/// DimensionMismatchError on shape errors and NumericError on non-finite
/// activations.
NoisePrediction predict_noise(const NetConfig& config, const Params& params, const Latent& z_t,
                              int t, const ConditionPair& conditions);

/// Batched forward pass; column j of the result is the prediction for inputs[j].
Matrix predict_noise_batch(const NetConfig& config, const Params& params,
                           std::span<const NetInput> inputs);

/// Mean over the batch of ||target - prediction||^2. If `grad` is non-null
/// it must have the shapes of `params` and receives dLoss/dParams
/// (overwritten, not accumulated).
double noise_loss(const NetConfig& config, const Params& params, std::span<const NetInput> batch,
                  Params* grad);

/// Binds a network and its conditions as a sampler input.
GuidedScoreFn net_score_fn(const NetConfig& config, const Params& params,
                           ConditionPair conditions);

}  // namespace duet

#endif  // DUET_SCORENET_HPP_
