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

// Independent reference implementations used as test oracles. They are
// deliberately naive (exhaustive search, fixed-point iteration) and share
// no code with the library.
#ifndef DUET_TESTS_ORACLES_HPP_
#define DUET_TESTS_ORACLES_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace duet::testing {

/// Minimum edit cost over every alignment path, enumerated without
/// memoization (exponential; fine up to length ~6).
inline std::size_t brute_force_edits(const std::vector<std::string>& ref,
                                     const std::vector<std::string>& hyp, std::size_t i = 0,
                                     std::size_t j = 0) {
  if (i == ref.size()) return hyp.size() - j;
  if (j == hyp.size()) return ref.size() - i;
  const std::size_t del = 1 + brute_force_edits(ref, hyp, i + 1, j);
  const std::size_t ins = 1 + brute_force_edits(ref, hyp, i, j + 1);
  const std::size_t sub = (ref[i] == hyp[j] ? 0 : 1) + brute_force_edits(ref, hyp, i + 1, j + 1);
  return std::min({del, ins, sub});
}

/// Every word sequence over `alphabet` with length <= max_len.
inline std::vector<std::vector<std::string>> all_sequences(const std::vector<std::string>& alphabet,
                                                           std::size_t max_len) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& s : frontier)
      for (const auto& w : alphabet) {
        auto t = s;
        t.push_back(w);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

/// Principal square root by the Denman-Beavers iteration
/// Y <- (Y + Z^-1) / 2, Z <- (Z + Y^-1) / 2, Y -> sqrt(M).
inline Eigen::MatrixXd denman_beavers_sqrt(const Eigen::MatrixXd& m, int max_iter = 200) {
  Eigen::MatrixXd y = m;
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::MatrixXd y_inv = y.inverse();
    const Eigen::MatrixXd z_inv = z.inverse();
    const Eigen::MatrixXd y_next = 0.5 * (y + z_inv);
    z = 0.5 * (z + y_inv);
    const double delta = (y_next - y).norm();
    y = y_next;
    if (delta < 1e-15 * (1.0 + y.norm())) break;
  }
  return y;
}

/// Frechet distance with the cross term from a Denman-Beavers square root
/// of S_a S_b (which has positive real eigenvalues for SPD inputs).
inline double frechet_reference(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& s_a,
                                const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& s_b) {
  const Eigen::MatrixXd root = denman_beavers_sqrt(s_a * s_b);
  return (mu_a - mu_b).squaredNorm() + (s_a + s_b - 2.0 * root).trace();
}

/// Root mean square computed in long double.
inline double rms_reference(const std::vector<double>& x) {
  long double acc = 0;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return x.empty() ? 0.0 : static_cast<double>(std::sqrt(acc / x.size()));
}

/// prod_{s <= t} (1 - beta_s) for a linear beta ramp, one factor at a time.
inline std::vector<double> alpha_bar_reference(int steps, double beta_min, double beta_max) {
  std::vector<double> out;
  long double running = 1.0L;
  for (int s = 0; s < steps; ++s) {
    const long double beta =
        steps == 1 ? beta_min
                   : beta_min + (static_cast<long double>(beta_max) - beta_min) * s / (steps - 1);
    running *= (1.0L - beta);
    out.push_back(static_cast<double>(running));
  }
  return out;
}

}  // namespace duet::testing

#endif  // DUET_TESTS_ORACLES_HPP_
