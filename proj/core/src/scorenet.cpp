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

#include "duet/scorenet.hpp"

#include <cmath>
#include <map>
#include <string>

#include "duet/error.hpp"
#include "duet/random.hpp"

namespace duet {
namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

struct ContentGroup {
  bool is_null = true;
  ContentSequence seq;
  Matrix keyed;   // content rows + positional tags, N x D
  Matrix keys;    // N x D
  Matrix values;  // N x D
  Matrix d_keys;
  Matrix d_values;
};

struct ForwardPass {
  Matrix z;         // d x B
  Matrix cond_in;   // (D + d_desc) x B
  Matrix cond_pre;  // D x B
  Matrix cond_act;  // D x B
  Matrix cond;      // D x B
  Matrix h0;        // D x B
  Matrix queries;   // D x B
  std::vector<Vector> attention;
  Matrix attn_out;  // D x B
  std::vector<Matrix> block_in;
  std::vector<Matrix> block_pre;
  Matrix h_last;
  Matrix out;  // d x B
  std::vector<int> group_of;
  std::vector<ContentGroup> groups;
  std::vector<bool> desc_is_null;
};

void check_input(const NetConfig& cfg, const NetInput& in) {
  if (in.z_t.dim() != cfg.d) {
    throw DimensionMismatchError("predict_noise: latent has dimension " +
                                 std::to_string(in.z_t.dim()) + ", network expects " +
                                 std::to_string(cfg.d));
  }
  if (in.conditions.desc && in.conditions.desc->size() != cfg.d_desc) {
    throw DimensionMismatchError("predict_noise: description condition has width " +
                                 std::to_string(in.conditions.desc->size()) + ", expected " +
                                 std::to_string(cfg.d_desc));
  }
  if (in.t < 0) throw TimestepError("predict_noise: negative timestep");
}

ForwardPass forward(const NetConfig& cfg, const Params& p, std::span<const NetInput> inputs) {
  const auto batch = static_cast<Eigen::Index>(inputs.size());
  const int width = cfg.d_model;
  ForwardPass f;
  f.z.resize(cfg.d, batch);
  f.cond_in.resize(width + cfg.d_desc, batch);
  f.desc_is_null.resize(inputs.size());
  f.group_of.resize(inputs.size());

  std::map<std::vector<int>, int> group_index;
  int null_group = -1;
  for (Eigen::Index j = 0; j < batch; ++j) {
    const NetInput& in = inputs[static_cast<size_t>(j)];
    check_input(cfg, in);
    f.z.col(j) = in.z_t.values;
    f.cond_in.col(j).head(width) = sinusoidal_embedding(in.t, width);
    f.desc_is_null[j] = !in.conditions.desc.has_value();
    f.cond_in.col(j).tail(cfg.d_desc) = in.conditions.desc ? *in.conditions.desc : p.null_desc;

    const auto& content = in.conditions.content;
    int g = -1;
    if (!content || content->empty()) {
      if (null_group < 0) {
        null_group = static_cast<int>(f.groups.size());
        f.groups.emplace_back();
      }
      g = null_group;
    } else {
      auto [it, inserted] = group_index.try_emplace(*content, static_cast<int>(f.groups.size()));
      if (inserted) {
        ContentGroup grp;
        grp.is_null = false;
        grp.seq = run_durator(p.encoder, *content, cfg.n_cont_tokens_max, cfg.n_frames);
        f.groups.push_back(std::move(grp));
      }
      g = it->second;
    }
    f.group_of[static_cast<size_t>(j)] = g;
  }

  for (ContentGroup& grp : f.groups) {
    const Matrix& rows = grp.is_null ? p.null_cont : grp.seq.upsampled;
    grp.keyed = rows + sinusoidal_table(static_cast<int>(rows.rows()), width);
    grp.keys = grp.keyed * p.attn_k.transpose();
    grp.values = grp.keyed * p.attn_v.transpose();
  }

  f.cond_pre = p.cond_w1 * f.cond_in;
  f.cond_pre.colwise() += p.cond_b1;
  f.cond_act = f.cond_pre.unaryExpr(&silu);
  f.cond = p.cond_w2 * f.cond_act;
  f.cond.colwise() += p.cond_b2;

  f.h0 = p.in_w * f.z + f.cond;
  f.h0.colwise() += p.in_b;

  const double inv_sqrt_width = 1.0 / std::sqrt(static_cast<double>(width));
  f.queries = p.attn_q * f.h0;
  f.attn_out.resize(width, batch);
  f.attention.resize(inputs.size());
  for (Eigen::Index j = 0; j < batch; ++j) {
    const ContentGroup& grp = f.groups[static_cast<size_t>(f.group_of[static_cast<size_t>(j)])];
    Vector scores = grp.keys * f.queries.col(j) * inv_sqrt_width;
    scores.array() -= scores.maxCoeff();
    Vector weights = scores.array().exp();
    weights /= weights.sum();
    f.attn_out.col(j) = grp.values.transpose() * weights;
    f.attention[static_cast<size_t>(j)] = std::move(weights);
  }

  Matrix h = f.h0 + p.attn_o * f.attn_out;
  for (const TrunkBlock& blk : p.blocks) {
    f.block_in.push_back(h);
    Matrix pre = blk.w1 * h + f.cond;
    pre.colwise() += blk.b1;
    h += blk.w2 * pre.unaryExpr(&silu);
    h.colwise() += blk.b2;
    f.block_pre.push_back(std::move(pre));
  }
  f.h_last = h;
  f.out = p.out_w * h;
  f.out.colwise() += p.out_b;
  if (!f.out.allFinite()) throw NumericError("predict_noise: non-finite activations");
  return f;
}

void backward(const NetConfig& cfg, const Params& p, const ForwardPass& f, const Matrix& d_out,
              Params& g) {
  const int width = cfg.d_model;
  const double inv_sqrt_width = 1.0 / std::sqrt(static_cast<double>(width));

  g.out_w.noalias() += d_out * f.h_last.transpose();
  g.out_b += d_out.rowwise().sum();
  Matrix d_h = p.out_w.transpose() * d_out;
  Matrix d_cond = Matrix::Zero(width, f.z.cols());

  for (size_t l = p.blocks.size(); l-- > 0;) {
    const TrunkBlock& blk = p.blocks[l];
    TrunkBlock& gb = g.blocks[l];
    const Matrix& pre = f.block_pre[l];
    gb.w2.noalias() += d_h * pre.unaryExpr(&silu).transpose();
    gb.b2 += d_h.rowwise().sum();
    const Matrix d_pre = (blk.w2.transpose() * d_h).cwiseProduct(pre.unaryExpr(&silu_grad));
    gb.w1.noalias() += d_pre * f.block_in[l].transpose();
    gb.b1 += d_pre.rowwise().sum();
    d_cond += d_pre;
    d_h.noalias() += blk.w1.transpose() * d_pre;
  }

  // Cross-attention: h1 = h0 + W_o * sum_n alpha_n v_n.
  g.attn_o.noalias() += d_h * f.attn_out.transpose();
  const Matrix d_attn_out = p.attn_o.transpose() * d_h;
  Matrix d_h0 = d_h;
  Matrix d_queries(width, f.z.cols());
  std::vector<ContentGroup> groups_grad(f.groups.size());
  for (size_t k = 0; k < f.groups.size(); ++k) {
    groups_grad[k].d_keys = Matrix::Zero(f.groups[k].keys.rows(), width);
    groups_grad[k].d_values = Matrix::Zero(f.groups[k].values.rows(), width);
  }
  for (Eigen::Index j = 0; j < f.z.cols(); ++j) {
    const size_t gi = static_cast<size_t>(f.group_of[static_cast<size_t>(j)]);
    const ContentGroup& grp = f.groups[gi];
    const Vector& alpha = f.attention[static_cast<size_t>(j)];
    const Vector d_o = d_attn_out.col(j);
    groups_grad[gi].d_values.noalias() += alpha * d_o.transpose();
    const Vector d_alpha = grp.values * d_o;
    const Vector d_scores = alpha.cwiseProduct((d_alpha.array() - alpha.dot(d_alpha)).matrix());
    groups_grad[gi].d_keys.noalias() += inv_sqrt_width * d_scores * f.queries.col(j).transpose();
    d_queries.col(j) = inv_sqrt_width * grp.keys.transpose() * d_scores;
  }
  g.attn_q.noalias() += d_queries * f.h0.transpose();
  d_h0.noalias() += p.attn_q.transpose() * d_queries;

  for (size_t k = 0; k < f.groups.size(); ++k) {
    const ContentGroup& grp = f.groups[k];
    const Matrix& dk = groups_grad[k].d_keys;
    const Matrix& dv = groups_grad[k].d_values;
    g.attn_k.noalias() += dk.transpose() * grp.keyed;
    g.attn_v.noalias() += dv.transpose() * grp.keyed;
    const Matrix d_rows = dk * p.attn_k + dv * p.attn_v;
    if (grp.is_null) {
      g.null_cont += d_rows;
    } else {
      const Matrix d_hidden = upsample_backward(d_rows, grp.seq.durations);
      encode_content_backward(p.encoder, grp.seq.encoded, d_hidden, g.encoder);
    }
  }

  g.in_w.noalias() += d_h0 * f.z.transpose();
  g.in_b += d_h0.rowwise().sum();
  d_cond += d_h0;

  g.cond_w2.noalias() += d_cond * f.cond_act.transpose();
  g.cond_b2 += d_cond.rowwise().sum();
  const Matrix d_cond_pre =
      (p.cond_w2.transpose() * d_cond).cwiseProduct(f.cond_pre.unaryExpr(&silu_grad));
  g.cond_w1.noalias() += d_cond_pre * f.cond_in.transpose();
  g.cond_b1 += d_cond_pre.rowwise().sum();
  const Matrix d_cond_in = p.cond_w1.transpose() * d_cond_pre;
  for (Eigen::Index j = 0; j < f.z.cols(); ++j) {
    if (f.desc_is_null[static_cast<size_t>(j)]) {
      g.null_desc += d_cond_in.col(j).tail(cfg.d_desc);
    }
  }
}

}  // namespace

void NetConfig::validate() const {
  if (d < 1 || d_desc < 1 || d_model < 1 || n_cont_tokens_max < 1 || layers < 0 ||
      vocab_size < 1 || n_frames < 1) {
    throw InvalidRangeError("network dimensions must be >= 1 (layers >= 0)");
  }
  if (n_frames < n_cont_tokens_max) {
    throw InvalidRangeError("frame budget n_frames must be >= n_cont_tokens_max");
  }
}

Params Params::init(const NetConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int w = cfg.d_model;
  const double s = 1.0 / std::sqrt(static_cast<double>(w));
  Params p;
  p.encoder = EncoderWeights::init(cfg.vocab_size, w, rng);
  p.null_desc = gaussian(cfg.d_desc, 1, 0.5, rng);
  p.null_cont = gaussian(1, w, 1.0, rng);
  p.cond_w1 = gaussian(w, w + cfg.d_desc, 1.0 / std::sqrt(static_cast<double>(w + cfg.d_desc)), rng);
  p.cond_b1 = Vector::Zero(w);
  p.cond_w2 = gaussian(w, w, s, rng);
  p.cond_b2 = Vector::Zero(w);
  p.in_w = gaussian(w, cfg.d, 1.0 / std::sqrt(static_cast<double>(cfg.d)), rng);
  p.in_b = Vector::Zero(w);
  p.attn_q = gaussian(w, w, s, rng);
  p.attn_k = gaussian(w, w, s, rng);
  p.attn_v = gaussian(w, w, s, rng);
  p.attn_o = gaussian(w, w, 0.5 * s, rng);
  for (int l = 0; l < cfg.layers; ++l) {
    TrunkBlock blk;
    blk.w1 = gaussian(w, w, s, rng);
    blk.b1 = Vector::Zero(w);
    blk.w2 = gaussian(w, w, 0.5 * s, rng);
    blk.b2 = Vector::Zero(w);
    p.blocks.push_back(std::move(blk));
  }
  p.out_w = gaussian(cfg.d, w, s, rng);
  p.out_b = Vector::Zero(cfg.d);
  return p;
}

Params Params::zeros_like(const Params& other) {
  Params z = other;
  z.for_each([](const char*, auto& t) { t.setZero(); });
  return z;
}

bool Params::all_finite() const {
  bool ok = true;
  for_each([&ok](const char*, const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

std::size_t Params::parameter_count() const {
  std::size_t n = 0;
  for_each([&n](const char*, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

ConditionPair ConditionPair::make(std::optional<Vector> desc, std::vector<int> content_tokens) {
  ConditionPair c;
  c.desc = std::move(desc);
  if (!content_tokens.empty()) c.content = std::move(content_tokens);
  return c;
}

ConditionPair ConditionPair::masked(ConditionMask mask) const {
  ConditionPair c;
  if (keeps_desc(mask)) c.desc = desc;
  if (keeps_cont(mask)) c.content = content;
  return c;
}

Matrix predict_noise_batch(const NetConfig& config, const Params& params,
                           std::span<const NetInput> inputs) {
  if (inputs.empty()) return Matrix(config.d, 0);
  return forward(config, params, inputs).out;
}

NoisePrediction predict_noise(const NetConfig& config, const Params& params, const Latent& z_t,
                              int t, const ConditionPair& conditions) {
  NetInput in{z_t, t, conditions, {}};
  return NoisePrediction{predict_noise_batch(config, params, {&in, 1}).col(0)};
}

double noise_loss(const NetConfig& config, const Params& params, std::span<const NetInput> batch,
                  Params* grad) {
  if (batch.empty()) throw InvalidRangeError("noise_loss: empty batch");
  const ForwardPass f = forward(config, params, batch);
  Matrix target(config.d, static_cast<Eigen::Index>(batch.size()));
  for (size_t j = 0; j < batch.size(); ++j) {
    if (batch[j].target.dim() != config.d) {
      throw DimensionMismatchError("noise_loss: target dimension does not match network");
    }
    target.col(static_cast<Eigen::Index>(j)) = batch[j].target.values;
  }
  const Matrix residual = f.out - target;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const double loss = residual.squaredNorm() * inv_batch;
  if (grad != nullptr) {
    grad->for_each([](const char*, auto& t) { t.setZero(); });
    backward(config, params, f, 2.0 * inv_batch * residual, *grad);
  }
  return loss;
}

GuidedScoreFn net_score_fn(const NetConfig& config, const Params& params,
                           ConditionPair conditions) {
  return [&config, &params, conditions = std::move(conditions)](const Latent& z, int t,
                                                                ConditionMask mask) {
    return predict_noise(config, params, z, t, conditions.masked(mask));
  };
}

}  // namespace duet
