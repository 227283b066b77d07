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

#ifndef DUET_TOOLS_CONFIG_HPP_
#define DUET_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "duet/curate.hpp"
#include "duet/oracle.hpp"
#include "duet/sampler.hpp"
#include "duet/schedule.hpp"
#include "duet/scorenet.hpp"
#include "duet/trainer.hpp"
#include "duet/transport.hpp"

namespace duet::cli {

enum class ValueType { kInt, kReal, kBool, kString, kRealList, kStringList };

/// Flat, typed key = value configuration.
///
///   # comment
///   @include base.conf
///   train.steps = 5000
///   sweep.w_cont = 5, 7, 9
///
/// Every key is declared up front with a type and a default; unknown keys
/// and badly typed values are InputErrors. Includes are resolved relative to
/// the including file, later assignments win.
class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::filesystem::path& path);

  /// Applies one "key=value" assignment.
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value);
  void merge_file(const std::filesystem::path& path);
  /// DUET_ASR_PRIMARY, DUET_ASR_SECONDARY and DUET_EMBEDDER override the
  /// matching endpoint keys when set.
  void apply_env();

  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Canonical text form: every key, sorted, one per line. Loading this
  /// text reproduces the configuration.
  std::string dump() const;

  static const std::vector<std::string>& keys();

 private:
  void merge_file(const std::filesystem::path& path, int depth);
  const std::string& raw(const std::string& key, ValueType expected) const;

  std::map<std::string, std::string> values_;
};

std::uint64_t run_seed(const RunConfig& config);
ToyWorld make_world(const RunConfig& config);
NoiseSchedule make_run_schedule(const RunConfig& config);
/// Latent and condition sizes follow the world.
NetConfig make_net_config(const RunConfig& config, const ToyWorld& world);
TrainerOptions make_trainer_options(const RunConfig& config);
SamplerOptions make_sampler_options(const RunConfig& config);
CurationRules make_curation_rules(const RunConfig& config);
TransportOptions make_transport_options(const RunConfig& config);

}  // namespace duet::cli

#endif  // DUET_TOOLS_CONFIG_HPP_
