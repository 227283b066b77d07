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

#ifndef DUET_AUDIO_HPP_
#define DUET_AUDIO_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duet/random.hpp"

namespace duet {

inline constexpr int kTargetRate = 16000;
inline constexpr double kSegmentSeconds = 10.0;
inline constexpr std::size_t kSegmentSamples = 160000;

/// Mono waveform with its sample rate and dataset tag.
struct AudioSegment {
  std::vector<double> samples;
  int rate = kTargetRate;
  std::string source;

  double duration_s() const {
    return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0;
  }
};

double rms(std::span<const double> samples);

/// Band-limited resampling with a Hann-windowed sinc kernel (16 zero
/// crossings each side, cutoff at 0.95 of the lower Nyquist frequency).
/// Output length is round(n * to_rate / from_rate).
std::vector<double> resample(std::span<const double> samples, int from_rate, int to_rate);

/// 16 kHz, exactly 10 s: longer clips keep their first 10 s, shorter ones
/// are zero-padded at the end. Idempotent. Throws InputError on empty audio.
AudioSegment standardize(const AudioSegment& audio);

/// Cuts a random 10 s window from longer clips and pads shorter ones at a
/// random offset. Used for noise clips before mixing.
AudioSegment random_crop_or_pad(const AudioSegment& audio, Rng& rng);

/// speech + g * noise with g = (rms_speech / rms_noise) * 10^(-snr_db / 20).
/// Both inputs must share rate and length. Throws InputError if the speech
/// or noise is silent.
AudioSegment mix_snr(const AudioSegment& speech, const AudioSegment& noise, double snr_db);

/// 10 log10(P_speech / P_noise) measured from a mix and its clean speech.
double measured_snr_db(std::span<const double> speech, std::span<const double> mixed);

struct MixInfo {
  std::string noise_id;
  double snr_db = 0.0;
};

/// On-the-fly noise augmentation for training speech segments.
struct MixPolicy {
  double probability = 0.5;
  double snr_min_db = 4.0;
  double snr_max_db = 20.0;
  std::vector<std::string> mixed_sources{"commonvoice"};

  bool applies_to(const std::string& source) const;
};

struct NoiseClip {
  std::string id;
  AudioSegment audio;
};

struct MixOutcome {
  AudioSegment audio;
  std::optional<MixInfo> mix;
};

/// Mixes a random noise clip into `speech` with probability
/// policy.probability when the source is eligible; SNR ~ U[snr_min, snr_max].
/// Other sources pass through untouched.
MixOutcome maybe_mix_for_training(const AudioSegment& speech, std::span<const NoiseClip> noise_pool,
                                  const MixPolicy& policy, Rng& rng);

}  // namespace duet

#endif  // DUET_AUDIO_HPP_
