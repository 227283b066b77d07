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

#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "duet/error.hpp"

namespace duet::cli {

namespace {

struct KeySpec {
  const char* name;
  ValueType type;
  const char* default_value;
};

// clang-format off
const KeySpec kKeys[] = {
    {"seed",                        ValueType::kInt,        "0"},
    {"schedule.steps",              ValueType::kInt,        "1000"},
    {"schedule.beta_min",           ValueType::kReal,       "0.0001"},
    {"schedule.beta_max",           ValueType::kReal,       "0.02"},
    {"world.kind",                  ValueType::kString,     "standard"},
    {"net.d_model",                 ValueType::kInt,        "32"},
    {"net.layers",                  ValueType::kInt,        "2"},
    {"net.n_frames",                ValueType::kInt,        "8"},
    {"net.n_cont_tokens_max",       ValueType::kInt,        "4"},
    {"train.steps",                 ValueType::kInt,        "5000"},
    {"train.batch",                 ValueType::kInt,        "64"},
    {"train.lr",                    ValueType::kReal,       "0.001"},
    {"train.weight_decay",          ValueType::kReal,       "0"},
    {"train.dropout_p",             ValueType::kReal,       "0.1"},
    {"train.log_every",             ValueType::kInt,        "50"},
    {"train.checkpoint_every",      ValueType::kInt,        "0"},
    {"train.resume",                ValueType::kString,     ""},
    {"guidance.w_desc",             ValueType::kReal,       "7"},
    {"guidance.w_cont",             ValueType::kReal,       "7"},
    {"sample.mode",                 ValueType::kString,     "oracle"},
    {"sample.checkpoint",           ValueType::kString,     ""},
    {"sample.n_steps",              ValueType::kInt,        "100"},
    {"sample.eta",                  ValueType::kReal,       "0"},
    {"sample.count",                ValueType::kInt,        "256"},
    {"sample.desc",                 ValueType::kInt,        "2"},
    {"sample.cont",                 ValueType::kInt,        "2"},
    {"sample.svg",                  ValueType::kBool,       "true"},
    {"sweep.w_desc",                ValueType::kRealList,   "5, 7, 9"},
    {"sweep.w_cont",                ValueType::kRealList,   "5, 7, 9"},
    {"sweep.count",                 ValueType::kInt,        "900"},
    {"sweep.reference_count",       ValueType::kInt,        "900"},
    {"sweep.workers",               ValueType::kInt,        "1"},
    {"curate.manifest",             ValueType::kString,     ""},
    {"curate.workers",              ValueType::kInt,        "1"},
    {"curate.min_english_prob",     ValueType::kReal,       "0.5"},
    {"curate.max_cross_wer",        ValueType::kReal,       "0.5"},
    {"curate.pretranscribed_max_s", ValueType::kReal,       "10"},
    {"curate.speech_sources",       ValueType::kStringList, ""},
    {"curate.non_speech_sources",   ValueType::kStringList, ""},
    {"asr.primary",                 ValueType::kString,     ""},
    {"asr.secondary",               ValueType::kString,     ""},
    {"embedder.endpoint",           ValueType::kString,     ""},
    {"client.timeout_s",            ValueType::kReal,       "30"},
    {"client.max_attempts",         ValueType::kInt,        "3"},
    {"eval.fixture",                ValueType::kString,     ""},
    {"oracle_check.samples",        ValueType::kInt,        "1000"},
    {"oracle_check.tolerance",      ValueType::kReal,       "1e-9"},
};
// clang-format on

const KeySpec& spec_for(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.name) return k;
  throw InputError("unknown config key '" + key + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

void check_value(const KeySpec& spec, const std::string& value) {
  bool ok = true;
  std::int64_t i;
  double r;
  bool b;
  switch (spec.type) {
    case ValueType::kInt: ok = parse_int(value, i); break;
    case ValueType::kReal: ok = parse_real(value, r); break;
    case ValueType::kBool: ok = parse_bool(value, b); break;
    case ValueType::kRealList:
      for (const auto& item : split_list(value)) ok = ok && parse_real(item, r);
      break;
    case ValueType::kString:
    case ValueType::kStringList: break;
  }
  if (!ok) throw InputError("bad value '" + value + "' for config key '" + spec.name + "'");
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_[k.name] = k.default_value;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig c;
  c.merge_file(path);
  return c;
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw InputError("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = spec_for(key);
  check_value(spec, value);
  values_[key] = value;
}

void RunConfig::merge_file(const std::filesystem::path& path) { merge_file(path, 0); }

void RunConfig::merge_file(const std::filesystem::path& path, int depth) {
  if (depth > 16) throw InputError("config includes nested too deeply at " + path.string());
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    try {
      if (body.rfind("@include", 0) == 0) {
        std::filesystem::path inc = trim(body.substr(8));
        if (inc.empty()) throw InputError("@include needs a path");
        if (inc.is_relative()) inc = path.parent_path() / inc;
        merge_file(inc, depth + 1);
      } else {
        set(std::string_view(body));
      }
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::apply_env() {
  const std::pair<const char*, const char*> vars[] = {
      {"DUET_ASR_PRIMARY", "asr.primary"},
      {"DUET_ASR_SECONDARY", "asr.secondary"},
      {"DUET_EMBEDDER", "embedder.endpoint"},
  };
  for (const auto& [env, key] : vars)
    if (const char* v = std::getenv(env); v && *v) set(key, v);
}

const std::string& RunConfig::raw(const std::string& key, ValueType expected) const {
  const KeySpec& spec = spec_for(key);
  if (spec.type != expected) throw InputError("config key '" + key + "' read with the wrong type");
  return values_.at(key);
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  std::int64_t v = 0;
  parse_int(raw(key, ValueType::kInt), v);
  return v;
}

double RunConfig::get_real(const std::string& key) const {
  double v = 0;
  parse_real(raw(key, ValueType::kReal), v);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  bool v = false;
  parse_bool(raw(key, ValueType::kBool), v);
  return v;
}

const std::string& RunConfig::get_string(const std::string& key) const {
  return raw(key, ValueType::kString);
}

std::vector<double> RunConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key, ValueType::kRealList))) {
    double v = 0;
    parse_real(item, v);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> RunConfig::get_string_list(const std::string& key) const {
  return split_list(raw(key, ValueType::kStringList));
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : kKeys) n.push_back(k.name);
    std::sort(n.begin(), n.end());
    return n;
  }();
  return names;
}

std::uint64_t run_seed(const RunConfig& config) {
  return static_cast<std::uint64_t>(config.get_int("seed"));
}

ToyWorld make_world(const RunConfig& config) {
  const std::string& kind = config.get_string("world.kind");
  if (kind == "standard") return ToyWorld::standard();
  if (kind == "correlated") return ToyWorld::correlated();
  throw InputError("world.kind must be 'standard' or 'correlated', got '" + kind + "'");
}

NoiseSchedule make_run_schedule(const RunConfig& config) {
  return make_schedule(static_cast<int>(config.get_int("schedule.steps")),
                       config.get_real("schedule.beta_min"), config.get_real("schedule.beta_max"));
}

NetConfig make_net_config(const RunConfig& config, const ToyWorld& world) {
  NetConfig c;
  c.d = world.dim();
  c.d_desc = world.desc_labels();
  c.d_model = static_cast<int>(config.get_int("net.d_model"));
  c.layers = static_cast<int>(config.get_int("net.layers"));
  c.n_frames = static_cast<int>(config.get_int("net.n_frames"));
  c.n_cont_tokens_max = static_cast<int>(config.get_int("net.n_cont_tokens_max"));
  c.vocab_size = world.vocab_size();
  c.seed = derive_seed(run_seed(config), {0x6e6574});
  c.validate();
  return c;
}

TrainerOptions make_trainer_options(const RunConfig& config) {
  TrainerOptions o;
  o.adam.learning_rate = config.get_real("train.lr");
  o.adam.weight_decay = config.get_real("train.weight_decay");
  o.dropout_p = config.get_real("train.dropout_p");
  if (o.dropout_p < 0.0 || o.dropout_p > 1.0) throw InvalidRangeError("train.dropout_p must lie in [0, 1]");
  if (o.adam.learning_rate < 0.0) throw InvalidRangeError("train.lr must be >= 0");
  return o;
}

SamplerOptions make_sampler_options(const RunConfig& config) {
  SamplerOptions o;
  o.n_steps = static_cast<int>(config.get_int("sample.n_steps"));
  o.eta = config.get_real("sample.eta");
  o.weights = GuidanceWeights(config.get_real("guidance.w_desc"), config.get_real("guidance.w_cont"));
  return o;
}

CurationRules make_curation_rules(const RunConfig& config) {
  CurationRules r;
  r.min_english_prob = config.get_real("curate.min_english_prob");
  r.max_cross_wer = config.get_real("curate.max_cross_wer");
  r.pretranscribed_max_s = config.get_real("curate.pretranscribed_max_s");
  r.speech_sources = config.get_string_list("curate.speech_sources");
  r.non_speech_sources = config.get_string_list("curate.non_speech_sources");
  return r;
}

TransportOptions make_transport_options(const RunConfig& config) {
  TransportOptions o;
  const double timeout = config.get_real("client.timeout_s");
  if (timeout <= 0.0) throw InvalidRangeError("client.timeout_s must be > 0");
  o.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout * 1000.0));
  o.max_attempts = static_cast<int>(config.get_int("client.max_attempts"));
  return o;
}

}  // namespace duet::cli
