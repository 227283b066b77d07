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

#ifndef DUET_GUIDANCE_HPP_
#define DUET_GUIDANCE_HPP_

#include <array>
#include <string_view>

#include "duet/diffusion.hpp"

namespace duet {

/// Which of the two conditions are kept (the rest are replaced by null).
enum class ConditionMask {
  kFull,      // (c_desc, c_cont)
  kDescOnly,  // (c_desc, null)
  kContOnly,  // (null, c_cont)
  kNull,      // (null, null)
};

inline constexpr std::array<ConditionMask, 4> kAllMasks = {
    ConditionMask::kFull, ConditionMask::kDescOnly, ConditionMask::kContOnly,
    ConditionMask::kNull};

constexpr bool keeps_desc(ConditionMask m) {
  return m == ConditionMask::kFull || m == ConditionMask::kDescOnly;
}
constexpr bool keeps_cont(ConditionMask m) {
  return m == ConditionMask::kFull || m == ConditionMask::kContOnly;
}
constexpr ConditionMask make_mask(bool keep_desc, bool keep_cont) {
  if (keep_desc) return keep_cont ? ConditionMask::kFull : ConditionMask::kDescOnly;
  return keep_cont ? ConditionMask::kContOnly : ConditionMask::kNull;
}
std::string_view mask_name(ConditionMask m);

/// Per-condition guidance strengths. Both must be finite and >= 0.
class GuidanceWeights {
 public:
  GuidanceWeights() = default;
  GuidanceWeights(double w_desc, double w_cont);

  double desc() const { return desc_; }
  double cont() const { return cont_; }

  /// Joint generation default.
  static GuidanceWeights joint() { return {7.0, 7.0}; }
  /// Content-dominant setting used for speech-only generation.
  static GuidanceWeights content_dominant() { return {1.0, 9.0}; }
  /// Description-dominant setting used for audio-only generation.
  static GuidanceWeights description_dominant() { return {9.0, 1.0}; }

  friend bool operator==(const GuidanceWeights&, const GuidanceWeights&) = default;

 private:
  double desc_ = 0.0;
  double cont_ = 0.0;
};

/// Single-weight guidance treating both conditions as one:
///   eps_cond + w (eps_cond - eps_null).
NoisePrediction unified_cfg_combine(const NoisePrediction& eps_cond,
                                    const NoisePrediction& eps_null, double w);

/// Dual guidance:
///   eps_full + w_desc (eps_desc_only - eps_null) + w_cont (eps_cont_only - eps_null).
NoisePrediction dual_cfg_combine(const NoisePrediction& eps_full,
                                 const NoisePrediction& eps_desc_only,
                                 const NoisePrediction& eps_cont_only,
                                 const NoisePrediction& eps_null, const GuidanceWeights& g);

}  // namespace duet

#endif  // DUET_GUIDANCE_HPP_
