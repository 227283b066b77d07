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

#ifndef DUET_EMBEDDER_HPP_
#define DUET_EMBEDDER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duet/diffusion.hpp"
#include "duet/transport.hpp"

namespace duet {

/// Either text or audio to embed into a shared space.
struct EmbedRequest {
  std::string id;
  std::optional<std::string> text;
  std::vector<std::uint8_t> wav_bytes;
};

/// Text/audio embedder contract, mirroring AsrClient.
class EmbedderClient {
 public:
  virtual ~EmbedderClient() = default;
  virtual Vector embed(const EmbedRequest& request) = 0;
};

/// JSONL fixture: {"id": ..., "embedding": [...]}.
class ReplayEmbedderClient final : public EmbedderClient {
 public:
  explicit ReplayEmbedderClient(std::map<std::string, Vector> entries) : entries_(std::move(entries)) {}
  static std::unique_ptr<ReplayEmbedderClient> from_file(const std::filesystem::path& path);

  Vector embed(const EmbedRequest& request) override;

 private:
  std::map<std::string, Vector> entries_;
};

/// Sends {"id", "text"} or {"id", "audio_wav_base64"}; expects {"embedding": [...]}.
class RemoteEmbedderClient final : public EmbedderClient {
 public:
  explicit RemoteEmbedderClient(std::unique_ptr<JsonTransport> transport)
      : transport_(std::move(transport)) {}

  Vector embed(const EmbedRequest& request) override;

 private:
  std::unique_ptr<JsonTransport> transport_;
};

std::unique_ptr<EmbedderClient> make_embedder_client(const std::string& endpoint,
                                                     TransportOptions options = {});

}  // namespace duet

#endif  // DUET_EMBEDDER_HPP_
