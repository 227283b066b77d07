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

#ifndef DUET_DURATOR_HPP_
#define DUET_DURATOR_HPP_

#include <optional>
#include <span>
#include <vector>

#include "duet/diffusion.hpp"
#include "duet/random.hpp"

namespace duet {

/// Sinusoidal position/timestep features of width `dim`: the first half are
/// sin(pos * f_i), the second half cos(pos * f_i), f_i = 10000^(-i / half).
Vector sinusoidal_embedding(double position, int dim);

/// Sinusoidal rows for positions 0..rows-1.
Matrix sinusoidal_table(int rows, int dim);

/// Weights of the content encoder and the duration predictor.
struct EncoderWeights {
  Matrix token_embedding;  // vocab x D
  Matrix ff_in_w;          // D x D
  Vector ff_in_b;
  Matrix ff_out_w;  // D x D
  Vector ff_out_b;
  Matrix dur_hidden_w;  // D x D
  Vector dur_hidden_b;
  Matrix dur_out_w;  // 1 x D
  Vector dur_out_b;  // 1

  static EncoderWeights init(int vocab_size, int d_model, Rng& rng);

  int vocab_size() const { return static_cast<int>(token_embedding.rows()); }
  int width() const { return static_cast<int>(token_embedding.cols()); }

  template <typename F>
  void for_each(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each(F&& f) const { visit(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f("encoder.token_embedding", self.token_embedding);
    f("encoder.ff_in_w", self.ff_in_w);
    f("encoder.ff_in_b", self.ff_in_b);
    f("encoder.ff_out_w", self.ff_out_w);
    f("encoder.ff_out_b", self.ff_out_b);
    f("durator.hidden_w", self.dur_hidden_w);
    f("durator.hidden_b", self.dur_hidden_b);
    f("durator.out_w", self.dur_out_w);
    f("durator.out_b", self.dur_out_b);
  }
};

/// Intermediate values of encode_content kept for the backward pass.
struct EncoderTrace {
  std::vector<int> tokens;
  Matrix inputs;        // L x D, embeddings + positional tags
  Matrix pre_activation;  // L x D
  Matrix activation;      // L x D
  Matrix hidden;          // L x D, H_cont
};

/// Embedding lookup + positional tags + one residual feed-forward layer.
/// Throws InvalidRangeError unless 1 <= L <= max_tokens and
/// UnknownTokenError for ids outside the vocabulary.
EncoderTrace encode_content_traced(const EncoderWeights& w, std::span<const int> tokens,
                                   int max_tokens);
Matrix encode_content(const EncoderWeights& w, std::span<const int> tokens, int max_tokens);

/// Accumulates gradients of the encoder weights given dL/dH_cont.
void encode_content_backward(const EncoderWeights& w, const EncoderTrace& trace,
                             const Matrix& d_hidden, EncoderWeights& grad);

/// Positive per-token durations (softplus head), before integer rounding.
Vector raw_durations(const EncoderWeights& w, const Matrix& hidden);

/// Integer durations >= 1 summing exactly to `frame_budget`: every token
/// gets one frame and the remaining frame_budget - L are split in
/// proportion to `raw` by the largest-remainder method (ties go to the
/// earlier token). Throws InvalidRangeError if frame_budget < L.
std::vector<int> allocate_durations(std::span<const double> raw, int frame_budget);

/// Durations for H_cont. With a frame budget the result sums to it
/// exactly; otherwise each raw duration is rounded, with a floor of 1.
/// Non-finite or non-positive raw values count as duration 1.
std::vector<int> predict_durations(const EncoderWeights& w, const Matrix& hidden,
                                   std::optional<int> frame_budget);

/// Repeats row i of `hidden` durations[i] times, keeping order. Throws
/// InvalidRangeError if the durations do not sum to `frame_budget`.
Matrix upsample(const Matrix& hidden, std::span<const int> durations, int frame_budget);

/// Adjoint of upsample: sums the frame gradients back onto their tokens.
Matrix upsample_backward(const Matrix& d_frames, std::span<const int> durations);

/// Token sequence carried through encoding, duration prediction and upsampling.
struct ContentSequence {
  EncoderTrace encoded;
  std::vector<int> durations;
  Matrix upsampled;  // N x D, c_cont
};

ContentSequence run_durator(const EncoderWeights& w, std::span<const int> tokens,
                            int max_tokens, int frame_budget);

}  // namespace duet

#endif  // DUET_DURATOR_HPP_
