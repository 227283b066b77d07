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

#include "duet/durator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "duet/error.hpp"

namespace duet {
namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

Vector sinusoidal_embedding(double position, int dim) {
  Vector v = Vector::Zero(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    v[i] = std::sin(position * freq);
    v[half + i] = std::cos(position * freq);
  }
  return v;
}

Matrix sinusoidal_table(int rows, int dim) {
  Matrix table(rows, dim);
  for (int r = 0; r < rows; ++r) table.row(r) = sinusoidal_embedding(r, dim).transpose();
  return table;
}

EncoderWeights EncoderWeights::init(int vocab_size, int d_model, Rng& rng) {
  if (vocab_size < 1 || d_model < 1) throw InvalidRangeError("encoder dims must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
  EncoderWeights w;
  w.token_embedding = gaussian(vocab_size, d_model, 1.0, rng);
  w.ff_in_w = gaussian(d_model, d_model, scale, rng);
  w.ff_in_b = Vector::Zero(d_model);
  w.ff_out_w = gaussian(d_model, d_model, 0.5 * scale, rng);
  w.ff_out_b = Vector::Zero(d_model);
  w.dur_hidden_w = gaussian(d_model, d_model, scale, rng);
  w.dur_hidden_b = Vector::Zero(d_model);
  w.dur_out_w = gaussian(1, d_model, scale, rng);
  w.dur_out_b = Vector::Zero(1);
  return w;
}

EncoderTrace encode_content_traced(const EncoderWeights& w, std::span<const int> tokens,
                                   int max_tokens) {
  const int length = static_cast<int>(tokens.size());
  if (length < 1 || length > max_tokens) {
    throw InvalidRangeError("content length " + std::to_string(length) + " outside [1, " +
                            std::to_string(max_tokens) + "]");
  }
  const int width = w.width();
  EncoderTrace tr;
  tr.tokens.assign(tokens.begin(), tokens.end());
  tr.inputs = sinusoidal_table(length, width);
  for (int i = 0; i < length; ++i) {
    const int tok = tokens[static_cast<size_t>(i)];
    if (tok < 0 || tok >= w.vocab_size()) {
      throw UnknownTokenError("token id " + std::to_string(tok) + " outside vocabulary of " +
                              std::to_string(w.vocab_size()));
    }
    tr.inputs.row(i) += w.token_embedding.row(tok);
  }
  tr.pre_activation = tr.inputs * w.ff_in_w.transpose();
  tr.pre_activation.rowwise() += w.ff_in_b.transpose();
  tr.activation = tr.pre_activation.unaryExpr(&silu);
  tr.hidden = tr.inputs + tr.activation * w.ff_out_w.transpose();
  tr.hidden.rowwise() += w.ff_out_b.transpose();
  return tr;
}

Matrix encode_content(const EncoderWeights& w, std::span<const int> tokens, int max_tokens) {
  return encode_content_traced(w, tokens, max_tokens).hidden;
}

void encode_content_backward(const EncoderWeights& w, const EncoderTrace& tr,
                             const Matrix& d_hidden, EncoderWeights& grad) {
  grad.ff_out_w.noalias() += d_hidden.transpose() * tr.activation;
  grad.ff_out_b += d_hidden.colwise().sum().transpose();
  const Matrix d_act = d_hidden * w.ff_out_w;
  const Matrix d_pre = d_act.cwiseProduct(tr.pre_activation.unaryExpr(&silu_grad));
  grad.ff_in_w.noalias() += d_pre.transpose() * tr.inputs;
  grad.ff_in_b += d_pre.colwise().sum().transpose();
  const Matrix d_inputs = d_hidden + d_pre * w.ff_in_w;
  for (size_t i = 0; i < tr.tokens.size(); ++i) {
    grad.token_embedding.row(tr.tokens[i]) += d_inputs.row(static_cast<Eigen::Index>(i));
  }
}

Vector raw_durations(const EncoderWeights& w, const Matrix& hidden) {
  Matrix g = hidden * w.dur_hidden_w.transpose();
  g.rowwise() += w.dur_hidden_b.transpose();
  g = g.unaryExpr(&silu);
  Vector logits = g * w.dur_out_w.transpose();
  logits.array() += w.dur_out_b[0];
  return logits.unaryExpr(&softplus);
}

std::vector<int> allocate_durations(std::span<const double> raw, int frame_budget) {
  const int length = static_cast<int>(raw.size());
  if (length < 1) throw InvalidRangeError("allocate_durations: empty duration vector");
  if (frame_budget < length) {
    throw InvalidRangeError("frame budget " + std::to_string(frame_budget) +
                            " is smaller than sequence length " + std::to_string(length));
  }
  std::vector<double> weights(raw.begin(), raw.end());
  for (double& x : weights) {
    if (!std::isfinite(x) || x < 0.0) x = 0.0;
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0);
    total = length;
  }

  const int spare = frame_budget - length;
  std::vector<int> durations(static_cast<size_t>(length), 1);
  std::vector<double> fractions(static_cast<size_t>(length));
  int assigned = 0;
  for (int i = 0; i < length; ++i) {
    const double quota = spare * weights[i] / total;
    const int whole = std::min(spare, static_cast<int>(std::floor(quota)));
    durations[i] += whole;
    assigned += whole;
    fractions[i] = quota - whole;
  }
  std::vector<int> order(static_cast<size_t>(length));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fractions[a] > fractions[b]; });
  // Floating-point floors can in principle over-assign; trim from the
  // smallest remainders in that case.
  int leftover = spare - assigned;
  for (int k = 0; leftover > 0; k = (k + 1) % length, --leftover) ++durations[order[k]];
  for (int k = length - 1; leftover < 0; k = (k + length - 1) % length) {
    if (durations[order[k]] > 1) {
      --durations[order[k]];
      ++leftover;
    }
  }
  return durations;
}

std::vector<int> predict_durations(const EncoderWeights& w, const Matrix& hidden,
                                   std::optional<int> frame_budget) {
  const Vector raw = raw_durations(w, hidden);
  if (frame_budget) return allocate_durations({raw.data(), static_cast<size_t>(raw.size())}, *frame_budget);
  std::vector<int> out(static_cast<size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double r = raw[i];
    out[static_cast<size_t>(i)] = std::isfinite(r) && r > 1.0 ? static_cast<int>(std::lround(r)) : 1;
  }
  return out;
}

Matrix upsample(const Matrix& hidden, std::span<const int> durations, int frame_budget) {
  if (static_cast<Eigen::Index>(durations.size()) != hidden.rows()) {
    throw DimensionMismatchError("upsample: one duration per hidden row required");
  }
  long total = 0;
  for (int d : durations) {
    if (d < 1) throw InvalidRangeError("upsample: durations must be >= 1");
    total += d;
  }
  if (total != frame_budget) {
    throw InvalidRangeError("upsample: durations sum to " + std::to_string(total) +
                            ", frame budget is " + std::to_string(frame_budget));
  }
  Matrix frames(frame_budget, hidden.cols());
  Eigen::Index row = 0;
  for (size_t i = 0; i < durations.size(); ++i) {
    for (int k = 0; k < durations[i]; ++k) frames.row(row++) = hidden.row(static_cast<Eigen::Index>(i));
  }
  return frames;
}

Matrix upsample_backward(const Matrix& d_frames, std::span<const int> durations) {
  Matrix d_hidden = Matrix::Zero(static_cast<Eigen::Index>(durations.size()), d_frames.cols());
  Eigen::Index row = 0;
  for (size_t i = 0; i < durations.size(); ++i) {
    for (int k = 0; k < durations[i]; ++k) d_hidden.row(static_cast<Eigen::Index>(i)) += d_frames.row(row++);
  }
  return d_hidden;
}

ContentSequence run_durator(const EncoderWeights& w, std::span<const int> tokens,
                            int max_tokens, int frame_budget) {
  ContentSequence seq;
  seq.encoded = encode_content_traced(w, tokens, max_tokens);
  seq.durations = predict_durations(w, seq.encoded.hidden, frame_budget);
  seq.upsampled = upsample(seq.encoded.hidden, seq.durations, frame_budget);
  return seq;
}

}  // namespace duet
