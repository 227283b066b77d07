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

#include "duet/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "duet/error.hpp"

namespace duet {
namespace {

constexpr int kZeroCrossings = 16;
constexpr double kRolloff = 0.95;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::vector<double> resample(std::span<const double> samples, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw InputError("resample: rates must be positive");
  if (from_rate == to_rate) return {samples.begin(), samples.end()};
  const double step = static_cast<double>(from_rate) / to_rate;  // input samples per output
  const double cutoff = std::min(1.0, static_cast<double>(to_rate) / from_rate) * kRolloff;
  const double half_width = kZeroCrossings / cutoff;
  const auto n_in = static_cast<long>(samples.size());
  const auto n_out = static_cast<long>(std::llround(static_cast<double>(n_in) * to_rate / from_rate));

  std::vector<double> out(static_cast<size_t>(n_out), 0.0);
  for (long n = 0; n < n_out; ++n) {
    const double center = n * step;
    const long lo = std::max(0L, static_cast<long>(std::ceil(center - half_width)));
    const long hi = std::min(n_in - 1, static_cast<long>(std::floor(center + half_width)));
    double acc = 0.0;
    for (long k = lo; k <= hi; ++k) {
      const double u = k - center;
      const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * u / half_width));
      acc += samples[static_cast<size_t>(k)] * cutoff * sinc(cutoff * u) * window;
    }
    out[static_cast<size_t>(n)] = acc;
  }
  return out;
}

AudioSegment standardize(const AudioSegment& audio) {
  if (audio.samples.empty()) throw InputError("standardize: empty audio");
  AudioSegment out;
  out.source = audio.source;
  out.rate = kTargetRate;
  out.samples = audio.rate == kTargetRate ? audio.samples
                                          : resample(audio.samples, audio.rate, kTargetRate);
  out.samples.resize(kSegmentSamples, 0.0);
  return out;
}

AudioSegment random_crop_or_pad(const AudioSegment& audio, Rng& rng) {
  if (audio.samples.empty()) throw InputError("random_crop_or_pad: empty audio");
  AudioSegment base = audio;
  if (base.rate != kTargetRate) {
    base.samples = resample(base.samples, base.rate, kTargetRate);
    base.rate = kTargetRate;
  }
  AudioSegment out;
  out.rate = kTargetRate;
  out.source = audio.source;
  out.samples.assign(kSegmentSamples, 0.0);
  const size_t n = base.samples.size();
  if (n >= kSegmentSamples) {
    std::uniform_int_distribution<size_t> start(0, n - kSegmentSamples);
    const size_t s = start(rng);
    std::copy_n(base.samples.begin() + static_cast<long>(s), kSegmentSamples, out.samples.begin());
  } else {
    std::uniform_int_distribution<size_t> offset(0, kSegmentSamples - n);
    std::copy(base.samples.begin(), base.samples.end(),
              out.samples.begin() + static_cast<long>(offset(rng)));
  }
  return out;
}

AudioSegment mix_snr(const AudioSegment& speech, const AudioSegment& noise, double snr_db) {
  if (speech.rate != noise.rate || speech.samples.size() != noise.samples.size()) {
    throw InputError("mix_snr: speech and noise must share rate and length");
  }
  if (!std::isfinite(snr_db)) throw InvalidRangeError("mix_snr: snr must be finite");
  const double rms_speech = rms(speech.samples);
  const double rms_noise = rms(noise.samples);
  if (!(rms_speech > 0.0)) throw InputError("mix_snr: speech is silent");
  if (!(rms_noise > 0.0)) throw InputError("mix_snr: noise is silent");
  const double gain = rms_speech / rms_noise * std::pow(10.0, -snr_db / 20.0);
  AudioSegment out = speech;
  for (size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += gain * noise.samples[i];
  return out;
}

double measured_snr_db(std::span<const double> speech, std::span<const double> mixed) {
  if (speech.size() != mixed.size()) throw InputError("measured_snr_db: length mismatch");
  double p_speech = 0.0;
  double p_noise = 0.0;
  for (size_t i = 0; i < speech.size(); ++i) {
    p_speech += speech[i] * speech[i];
    const double n = mixed[i] - speech[i];
    p_noise += n * n;
  }
  return 10.0 * std::log10(p_speech / p_noise);
}

bool MixPolicy::applies_to(const std::string& source) const {
  return std::find(mixed_sources.begin(), mixed_sources.end(), source) != mixed_sources.end();
}

MixOutcome maybe_mix_for_training(const AudioSegment& speech, std::span<const NoiseClip> noise_pool,
                                  const MixPolicy& policy, Rng& rng) {
  if (!policy.applies_to(speech.source) || noise_pool.empty()) return {speech, std::nullopt};
  std::bernoulli_distribution coin(policy.probability);
  if (!coin(rng)) return {speech, std::nullopt};
  std::uniform_int_distribution<size_t> pick(0, noise_pool.size() - 1);
  const NoiseClip& clip = noise_pool[pick(rng)];
  std::uniform_real_distribution<double> snr(policy.snr_min_db, policy.snr_max_db);
  const double snr_db = snr(rng);
  const AudioSegment noise = random_crop_or_pad(clip.audio, rng);
  return {mix_snr(standardize(speech), noise, snr_db), MixInfo{clip.id, snr_db}};
}

}  // namespace duet
