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

#ifndef DUET_WAV_HPP_
#define DUET_WAV_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "duet/audio.hpp"

namespace duet {

/// Decodes 16-bit PCM RIFF/WAVE data; multi-channel audio is averaged to
/// mono. Samples are scaled to [-1, 1). Throws InputError otherwise.
AudioSegment decode_wav(std::span<const std::uint8_t> bytes);

/// Encodes mono 16-bit PCM, clipping to [-1, 1].
std::vector<std::uint8_t> encode_wav(const AudioSegment& audio);

AudioSegment read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSegment& audio);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace duet

#endif  // DUET_WAV_HPP_
