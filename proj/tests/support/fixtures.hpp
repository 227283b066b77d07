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

#ifndef DUET_TESTS_FIXTURES_HPP_
#define DUET_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "duet/curate.hpp"

namespace duet::testing {

std::filesystem::path fixture_dir();

/// A fresh, empty directory under the system temp dir.
std::filesystem::path make_temp_dir(const std::string& tag);

/// Copies the curation fixture manifest into `dir` and writes the synthetic
/// audio it describes. Returns the manifest path inside `dir`.
std::filesystem::path materialize_curation_fixture(const std::filesystem::path& dir);

/// Rules the curation fixture's expected labels were derived with.
CurationRules curation_fixture_rules();

struct ExpectedLabel {
  SegmentLabel label;
  std::string provenance;
  std::string text_cont;  // empty when absent
};
std::map<std::string, ExpectedLabel> curation_fixture_expected();

}  // namespace duet::testing

#endif  // DUET_TESTS_FIXTURES_HPP_
