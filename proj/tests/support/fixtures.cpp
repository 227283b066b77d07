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

#include "support/fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>

#include <unistd.h>

#include "duet/error.hpp"
#include "duet/wav.hpp"
#include "json.hpp"

namespace duet::testing {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path fixture_dir() { return DUET_TEST_FIXTURES; }

fs::path make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("duet-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path materialize_curation_fixture(const fs::path& dir) {
  const fs::path src = fixture_dir() / "curation" / "manifest.jsonl";
  const fs::path dst = dir / "manifest.jsonl";
  fs::create_directories(dir);
  fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
  fs::create_directories(dir / "audio");

  std::ifstream in(src);
  std::string line;
  int k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    AudioSegment a;
    a.rate = j.at("rate").get<int>();
    const auto n = static_cast<std::size_t>(std::llround(j.at("duration_s").get<double>() * a.rate));
    a.samples.resize(n);
    const double f = 220.0 + 40.0 * k++;
    for (std::size_t i = 0; i < n; ++i)
      a.samples[i] = 0.3 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / a.rate);
    write_wav(dir / j.at("audio").get<std::string>(), a);
  }
  return dst;
}

CurationRules curation_fixture_rules() {
  CurationRules r;
  r.non_speech_sources = {"demand"};
  r.speech_sources = {"voxceleb"};
  return r;
}

std::map<std::string, ExpectedLabel> curation_fixture_expected() {
  std::ifstream in(fixture_dir() / "curation" / "expected.jsonl");
  if (!in) throw InputError("missing expected.jsonl");
  std::map<std::string, ExpectedLabel> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    out[j.at("id").get<std::string>()] = {parse_label(j.at("label").get<std::string>()),
                                          j.at("provenance").get<std::string>(),
                                          j.value("text_cont", std::string())};
  }
  return out;
}

}  // namespace duet::testing
