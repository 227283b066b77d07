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

#ifndef DUET_METRICS_HPP_
#define DUET_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duet/diffusion.hpp"

namespace duet {

/// Normalized words: ASCII-lowercased, punctuation characters removed,
/// split on whitespace.
struct TokenSeq {
  std::vector<std::string> words;

  static TokenSeq from_text(std::string_view text);
  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }
};

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t total() const { return substitutions + insertions + deletions; }
};

/// Minimum-cost alignment of hyp against ref (unit costs).
EditCounts align_words(std::span<const std::string> ref, std::span<const std::string> hyp);
std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);

/// (S + I + D) / |ref|. Throws InputError on an empty reference.
double wer(const TokenSeq& ref, const TokenSeq& hyp);
double wer(std::string_view ref_text, std::string_view hyp_text);

/// Disagreement between two recognizers on the same audio: the secondary
/// transcript is the reference, i.e. wer(hyp_secondary, hyp_primary).
double delta_wer(const TokenSeq& hyp_primary, const TokenSeq& hyp_secondary);

inline constexpr double kKlEpsilon = 1e-10;

/// sum_i p_i log(p_i / q_i) over p_i > 0, with q_i floored at kKlEpsilon.
/// Both inputs must be non-negative and sum to 1 within 1e-6.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Gaussian statistics of an embedding cloud.
struct EmbeddingSet {
  Vector mu;
  Matrix sigma;
  std::size_t count = 0;

  /// Rows are embeddings; covariance uses the n - 1 denominator.
  static EmbeddingSet from_vectors(const Matrix& rows);
  /// Validates symmetry (1e-10) and PSD-ness (eigenvalues >= -1e-8).
  static EmbeddingSet from_moments(Vector mu, Matrix sigma);

  Eigen::Index dim() const { return mu.size(); }
};

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}). The trace of the
/// square root is taken from the eigenvalues of S_a^{1/2} S_b S_a^{1/2}.
double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b);

/// Cosine similarity; throws InputError for zero vectors.
double embedding_cosine(const Vector& a, const Vector& b);

}  // namespace duet

#endif  // DUET_METRICS_HPP_
