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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "duet/durator.hpp"
#include "duet/error.hpp"

namespace duet {
namespace {

// Exhaustive search over every composition of `budget` into positive
// parts for the one closest (in squared error) to the proportional quota
// 1 + (budget - L) * raw_i / sum(raw). Ties prefer giving frames to earlier
// tokens, i.e. the lexicographically largest vector.
std::vector<int> brute_force_allocation(const std::vector<double>& raw, int budget) {
  const int L = static_cast<int>(raw.size());
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> quota(L);
  for (int i = 0; i < L; ++i) quota[i] = 1.0 + (budget - L) * raw[i] / total;

  std::vector<int> best, cur(L);
  double best_err = INFINITY;
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == L - 1) {
      cur[i] = left;
      double err = 0;
      for (int k = 0; k < L; ++k) err += (cur[k] - quota[k]) * (cur[k] - quota[k]);
      if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && cur > best)) {
        best_err = err;
        best = cur;
      }
      return;
    }
    for (int d = 1; d <= left - (L - 1 - i); ++d) {
      cur[i] = d;
      rec(i + 1, left - d);
    }
  };
  rec(0, budget);
  return best;
}

TEST(Sinusoidal, Layout) {
  const Vector e = sinusoidal_embedding(3.0, 8);
  ASSERT_EQ(e.size(), 8);
  EXPECT_NEAR(e[0], std::sin(3.0), 1e-15);
  EXPECT_NEAR(e[4], std::cos(3.0), 1e-15);
  EXPECT_NEAR(e[1], std::sin(3.0 * std::pow(10000.0, -1.0 / 4)), 1e-15);
  const Matrix table = sinusoidal_table(5, 8);
  EXPECT_EQ(table.row(3).transpose(), e);
}

TEST(AllocateDurations, UniformRescale) {
  EXPECT_EQ(allocate_durations(std::vector<double>(5, 0.7), 10), (std::vector<int>{2, 2, 2, 2, 2}));
}

TEST(AllocateDurations, LargestRemainder) {
  const std::vector<double> raw{1, 1, 1, 1, 7};
  const auto d = allocate_durations(raw, 10);
  EXPECT_EQ(std::accumulate(d.begin(), d.end(), 0), 10);
  EXPECT_EQ(d, brute_force_allocation(raw, 10));
  EXPECT_EQ(d, (std::vector<int>{2, 2, 1, 1, 4}));
}

TEST(AllocateDurations, BudgetEqualsLength) {
  EXPECT_EQ(allocate_durations(std::vector<double>{5, 0.1, 3}, 3), (std::vector<int>{1, 1, 1}));
}

TEST(AllocateDurations, MatchesBruteForceOnRandomInputs) {
  Rng rng(99);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  std::uniform_int_distribution<int> len(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const int L = len(rng);
    std::vector<double> raw(L);
    for (double& r : raw) r = u(rng);
    const int budget = L + std::uniform_int_distribution<int>(0, 9)(rng);
    const auto d = allocate_durations(raw, budget);
    EXPECT_EQ(d, brute_force_allocation(raw, budget)) << "trial " << trial;
  }
}

TEST(AllocateDurations, DegenerateAndInvalid) {
  EXPECT_EQ(allocate_durations(std::vector<double>{0, 0}, 4), (std::vector<int>{2, 2}));
  EXPECT_EQ(allocate_durations(std::vector<double>{NAN, 1.0}, 4), (std::vector<int>{1, 3}));
  EXPECT_THROW(allocate_durations(std::vector<double>{1, 1, 1}, 2), InvalidRangeError);
  EXPECT_THROW(allocate_durations(std::vector<double>{}, 2), InvalidRangeError);
}

TEST(Upsample, IdentityAndByHand) {
  Matrix h(2, 3);
  h << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(upsample(h, std::vector<int>{1, 1}, 2), h);
  const Matrix u = upsample(h, std::vector<int>{2, 1}, 3);
  ASSERT_EQ(u.rows(), 3);
  EXPECT_EQ(u.row(0), h.row(0));
  EXPECT_EQ(u.row(1), h.row(0));
  EXPECT_EQ(u.row(2), h.row(1));
  EXPECT_THROW(upsample(h, std::vector<int>{2, 1}, 4), InvalidRangeError);
  EXPECT_THROW(upsample(h, std::vector<int>{0, 3}, 3), InvalidRangeError);
  EXPECT_THROW(upsample(h, std::vector<int>{3}, 3), DimensionMismatchError);
}

TEST(Upsample, RowCountsMatchDurations) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int L = 1 + trial % 6;
    Matrix h = Matrix::Random(L, 4);
    for (int i = 0; i < L; ++i) h(i, 0) = i;  // row tag
    std::vector<int> d(L);
    int total = 0;
    for (int& x : d) total += (x = std::uniform_int_distribution<int>(1, 4)(rng));
    const Matrix u = upsample(h, d, total);
    ASSERT_EQ(u.rows(), total);
    std::vector<int> counts(L, 0);
    for (int r = 0; r < total; ++r) {
      const int tag = static_cast<int>(u(r, 0));
      ++counts[tag];
      EXPECT_EQ(u.row(r), h.row(tag));
    }
    EXPECT_EQ(counts, d);
    // The adjoint sums frame gradients per token.
    const Matrix back = upsample_backward(Matrix::Ones(total, 4), d);
    for (int i = 0; i < L; ++i) EXPECT_EQ(back(i, 1), d[i]);
  }
}

TEST(Encoder, ShapesAndDeterminism) {
  Rng rng(1);
  const EncoderWeights w = EncoderWeights::init(7, 16, rng);
  const std::vector<int> one{3};
  EXPECT_EQ(encode_content(w, one, 4).rows(), 1);
  EXPECT_EQ(encode_content(w, one, 4).cols(), 16);
  const std::vector<int> toks{1, 2, 5};
  EXPECT_EQ(encode_content(w, toks, 4), encode_content(w, toks, 4));
  const std::vector<int> swapped{2, 1, 5};
  EXPECT_NE(encode_content(w, toks, 4), encode_content(w, swapped, 4));
  EXPECT_THROW(encode_content(w, std::vector<int>{7}, 4), UnknownTokenError);
  EXPECT_THROW(encode_content(w, std::vector<int>{1, 1, 1, 1, 1}, 4), InvalidRangeError);
  EXPECT_THROW(encode_content(w, std::vector<int>{}, 4), InvalidRangeError);
}

TEST(Durator, RunProducesFrameBudget) {
  Rng rng(2);
  const EncoderWeights w = EncoderWeights::init(7, 8, rng);
  const std::vector<int> toks{1, 4, 6};
  const ContentSequence seq = run_durator(w, toks, 4, 8);
  EXPECT_EQ(seq.upsampled.rows(), 8);
  EXPECT_EQ(std::accumulate(seq.durations.begin(), seq.durations.end(), 0), 8);
  for (int d : seq.durations) EXPECT_GE(d, 1);
  const Vector raw = raw_durations(w, seq.encoded.hidden);
  for (Eigen::Index i = 0; i < raw.size(); ++i) EXPECT_GT(raw[i], 0.0);
  const auto free = predict_durations(w, seq.encoded.hidden, std::nullopt);
  for (int d : free) EXPECT_GE(d, 1);
}

}  // namespace
}  // namespace duet
