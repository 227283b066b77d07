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

#include "duet/embedder.hpp"

#include <fstream>

#include "duet/error.hpp"
#include "json.hpp"

namespace duet {

using nlohmann::json;

namespace {

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  if (values.empty()) throw InputError("empty embedding");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::unique_ptr<ReplayEmbedderClient> ReplayEmbedderClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding fixture " + path.string());
  std::map<std::string, Vector> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      entries[j.at("id").get<std::string>()] = vector_from_json(j.at("embedding"));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return std::make_unique<ReplayEmbedderClient>(std::move(entries));
}

Vector ReplayEmbedderClient::embed(const EmbedRequest& request) {
  const auto it = entries_.find(request.id);
  if (it == entries_.end()) throw ClientError("no recorded embedding for " + request.id);
  return it->second;
}

Vector RemoteEmbedderClient::embed(const EmbedRequest& request) {
  json body = {{"id", request.id}};
  if (request.text) {
    body["text"] = *request.text;
  } else {
    body["audio_wav_base64"] = base64_encode(request.wav_bytes);
  }
  const std::string reply = transport_->call(body.dump());
  try {
    return vector_from_json(json::parse(reply).at("embedding"));
  } catch (const json::exception& e) {
    throw ClientError("malformed embedder response: " + std::string(e.what()));
  }
}

std::unique_ptr<EmbedderClient> make_embedder_client(const std::string& endpoint,
                                                     TransportOptions options) {
  if (endpoint.starts_with("replay:")) return ReplayEmbedderClient::from_file(endpoint.substr(7));
  return std::make_unique<RemoteEmbedderClient>(make_transport(endpoint, options));
}

}  // namespace duet
