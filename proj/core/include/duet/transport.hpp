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

#ifndef DUET_TRANSPORT_HPP_
#define DUET_TRANSPORT_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace duet {

struct TransportOptions {
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds retry_backoff{100};
};

/// Request/response exchange of JSON documents with an external model
/// server. Implementations retry failed calls and throw ClientError once
/// every attempt has failed.
class JsonTransport {
 public:
  virtual ~JsonTransport() = default;
  virtual std::string call(const std::string& request_json) = 0;
};

/// Spawns `/bin/sh -c command` per request, writes the request followed by
/// a newline to its stdin and reads the response from its stdout. A
/// non-zero exit status or a timeout counts as a failed attempt.
std::unique_ptr<JsonTransport> make_subprocess_transport(std::string command,
                                                         TransportOptions options = {});

/// POSTs the request as application/json to `url` (http://host:port/path).
std::unique_ptr<JsonTransport> make_http_transport(const std::string& url,
                                                   TransportOptions options = {});

/// "exec:<command>" or "http://..." endpoints.
std::unique_ptr<JsonTransport> make_transport(const std::string& endpoint,
                                              TransportOptions options = {});

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace duet

#endif  // DUET_TRANSPORT_HPP_
