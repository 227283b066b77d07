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

#include "duet/asr.hpp"

#include <fstream>

#include "duet/error.hpp"
#include "json.hpp"

namespace duet {

using nlohmann::json;

namespace {

AsrResponse response_from_json(const json& j) {
  AsrResponse r;
  r.text = j.at("text").get<std::string>();
  if (j.contains("language_prob") && !j.at("language_prob").is_null()) {
    r.language_prob = j.at("language_prob").get<double>();
  }
  return r;
}

}  // namespace

std::unique_ptr<ReplayAsrClient> ReplayAsrClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ASR fixture " + path.string());
  std::map<std::string, Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Entry e;
      if (j.contains("error")) {
        e.error = j.at("error").get<std::string>();
      } else {
        e.response = response_from_json(j);
      }
      entries[j.at("id").get<std::string>()] = std::move(e);
    } catch (const json::exception& ex) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return std::make_unique<ReplayAsrClient>(std::move(entries));
}

AsrResponse ReplayAsrClient::transcribe(const AsrRequest& request) {
  ++calls_;
  const auto it = entries_.find(request.segment_id);
  if (it == entries_.end()) throw ClientError("no recorded response for " + request.segment_id);
  if (!it->second.response) throw ClientError(it->second.error);
  return *it->second.response;
}

AsrResponse RemoteAsrClient::transcribe(const AsrRequest& request) {
  const json body = {{"id", request.segment_id}, {"audio_wav_base64", base64_encode(request.wav_bytes)}};
  const std::string reply = transport_->call(body.dump());
  try {
    return response_from_json(json::parse(reply));
  } catch (const json::exception& e) {
    throw ClientError("malformed ASR response: " + std::string(e.what()));
  }
}

std::unique_ptr<AsrClient> make_asr_client(const std::string& endpoint, TransportOptions options) {
  if (endpoint.starts_with("replay:")) return ReplayAsrClient::from_file(endpoint.substr(7));
  return std::make_unique<RemoteAsrClient>(make_transport(endpoint, options));
}

}  // namespace duet
