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

#include "duet/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "duet/error.hpp"

namespace duet {
namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-8;

void check_distribution(std::span<const double> p, const char* name) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InputError(std::string("kl_divergence: ") + name + " has a negative or non-finite entry");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw InputError(std::string("kl_divergence: ") + name + " does not sum to 1");
  }
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

TokenSeq TokenSeq::from_text(std::string_view text) {
  TokenSeq seq;
  std::string word;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!word.empty()) seq.words.push_back(std::move(word));
      word.clear();
    } else if (!std::ispunct(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!word.empty()) seq.words.push_back(std::move(word));
  return seq;
}

EditCounts align_words(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const size_t n = ref.size();
  const size_t m = hyp.size();
  // cost[i][j] with back-pointers packed as counts.
  std::vector<EditCounts> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j].insertions = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = EditCounts{0, 0, i};
    for (size_t j = 1; j <= m; ++j) {
      EditCounts diag = prev[j - 1];
      if (ref[i - 1] != hyp[j - 1]) ++diag.substitutions;
      EditCounts del = prev[j];
      ++del.deletions;
      EditCounts ins = cur[j - 1];
      ++ins.insertions;
      EditCounts best = diag;
      if (del.total() < best.total()) best = del;
      if (ins.total() < best.total()) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  return align_words(a, b).total();
}

double wer(const TokenSeq& ref, const TokenSeq& hyp) {
  if (ref.empty()) throw InputError("wer: empty reference");
  return static_cast<double>(edit_distance(ref.words, hyp.words)) / static_cast<double>(ref.size());
}

double wer(std::string_view ref_text, std::string_view hyp_text) {
  return wer(TokenSeq::from_text(ref_text), TokenSeq::from_text(hyp_text));
}

double delta_wer(const TokenSeq& hyp_primary, const TokenSeq& hyp_secondary) {
  return wer(hyp_secondary, hyp_primary);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    throw InputError("kl_divergence: distributions must share a non-empty support");
  }
  check_distribution(p, "p");
  check_distribution(q, "q");
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], kKlEpsilon));
  }
  return kl;
}

EmbeddingSet EmbeddingSet::from_vectors(const Matrix& rows) {
  if (rows.rows() < 2 || rows.cols() < 1) {
    throw InputError("EmbeddingSet needs at least two embeddings of dimension >= 1");
  }
  EmbeddingSet s;
  s.count = static_cast<std::size_t>(rows.rows());
  s.mu = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - s.mu.transpose();
  s.sigma = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  s.sigma = 0.5 * (s.sigma + s.sigma.transpose());
  return s;
}

EmbeddingSet EmbeddingSet::from_moments(Vector mu, Matrix sigma) {
  if (sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
    throw DimensionMismatchError("EmbeddingSet: covariance must be k x k for a k-vector mean");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw InputError("EmbeddingSet: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTol) {
    throw InputError("EmbeddingSet: covariance is not positive semidefinite");
  }
  EmbeddingSet s;
  s.mu = std::move(mu);
  s.sigma = std::move(sigma);
  return s;
}

double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.dim() != b.dim()) throw DimensionMismatchError("frechet_distance: embedding widths differ");
  const Matrix root_a = psd_sqrt(a.sigma);
  Matrix product = root_a * b.sigma * root_a;
  product = 0.5 * (product + product.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(product, Eigen::EigenvaluesOnly);
  const Vector& lambdas = eig.eigenvalues();
  const double scale = std::max(1.0, lambdas.cwiseAbs().maxCoeff());
  if (lambdas.minCoeff() < -kPsdTol * scale) {
    throw InputError("frechet_distance: covariance product is not positive semidefinite");
  }
  const double trace_root = lambdas.cwiseMax(0.0).cwiseSqrt().sum();
  const double fd = (a.mu - b.mu).squaredNorm() + a.sigma.trace() + b.sigma.trace() - 2.0 * trace_root;
  return std::max(0.0, fd);
}

double embedding_cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatchError("embedding_cosine: widths differ");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw InputError("embedding_cosine: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace duet
