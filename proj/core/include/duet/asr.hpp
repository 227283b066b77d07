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

#ifndef DUET_ASR_HPP_
#define DUET_ASR_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duet/transport.hpp"

namespace duet {

struct AsrRequest {
  std::string segment_id;
  std::vector<std::uint8_t> wav_bytes;  // 16-bit PCM WAV
};

struct AsrResponse {
  std::string text;
  /// Probability that the spoken language is English, when the backend
  /// performs language identification.
  std::optional<double> language_prob;
};

/// Speech recognizer contract. Implementations throw ClientError on failure
/// and must be safe to call from several threads.
class AsrClient {
 public:
  virtual ~AsrClient() = default;
  virtual AsrResponse transcribe(const AsrRequest& request) = 0;
};

/// Answers from recorded responses, keyed by segment id. Fixture files are
/// JSONL: {"id": ..., "text": ..., "language_prob": ...} or
/// {"id": ..., "error": "..."} to replay a failure.
class ReplayAsrClient final : public AsrClient {
 public:
  struct Entry {
    std::optional<AsrResponse> response;
    std::string error;
  };

  explicit ReplayAsrClient(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}
  static std::unique_ptr<ReplayAsrClient> from_file(const std::filesystem::path& path);

  AsrResponse transcribe(const AsrRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, Entry> entries_;
  std::atomic<std::size_t> calls_{0};
};

/// Sends {"id", "audio_wav_base64"} and expects {"text", "language_prob"?}.
class RemoteAsrClient final : public AsrClient {
 public:
  explicit RemoteAsrClient(std::unique_ptr<JsonTransport> transport)
      : transport_(std::move(transport)) {}

  AsrResponse transcribe(const AsrRequest& request) override;

 private:
  std::unique_ptr<JsonTransport> transport_;
};

/// "replay:<fixture.jsonl>", "exec:<command>" or "http://...".
std::unique_ptr<AsrClient> make_asr_client(const std::string& endpoint, TransportOptions options = {});

}  // namespace duet

#endif  // DUET_ASR_HPP_
