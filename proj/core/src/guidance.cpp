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

#include "duet/guidance.hpp"

#include <cmath>
#include <string>

#include "duet/error.hpp"

namespace duet {

std::string_view mask_name(ConditionMask m) {
  switch (m) {
    case ConditionMask::kFull: return "full";
    case ConditionMask::kDescOnly: return "desc_only";
    case ConditionMask::kContOnly: return "cont_only";
    case ConditionMask::kNull: return "null";
  }
  return "?";
}

GuidanceWeights::GuidanceWeights(double w_desc, double w_cont) : desc_(w_desc), cont_(w_cont) {
  if (!std::isfinite(w_desc) || !std::isfinite(w_cont) || w_desc < 0.0 || w_cont < 0.0) {
    throw InvalidRangeError("guidance weights must be finite and non-negative, got (" +
                            std::to_string(w_desc) + ", " + std::to_string(w_cont) + ")");
  }
}

NoisePrediction unified_cfg_combine(const NoisePrediction& eps_cond,
                                    const NoisePrediction& eps_null, double w) {
  if (eps_cond.dim() != eps_null.dim()) {
    throw DimensionMismatchError("unified_cfg_combine: prediction dimensions differ");
  }
  if (!std::isfinite(w) || w < 0.0) throw InvalidRangeError("unified_cfg_combine: w must be finite and >= 0");
  return NoisePrediction{eps_cond.values + w * (eps_cond.values - eps_null.values)};
}

NoisePrediction dual_cfg_combine(const NoisePrediction& eps_full,
                                 const NoisePrediction& eps_desc_only,
                                 const NoisePrediction& eps_cont_only,
                                 const NoisePrediction& eps_null, const GuidanceWeights& g) {
  const auto d = eps_full.dim();
  if (eps_desc_only.dim() != d || eps_cont_only.dim() != d || eps_null.dim() != d) {
    throw DimensionMismatchError("dual_cfg_combine: prediction dimensions differ");
  }
  return NoisePrediction{eps_full.values + g.desc() * (eps_desc_only.values - eps_null.values) +
                         g.cont() * (eps_cont_only.values - eps_null.values)};
}

}  // namespace duet
