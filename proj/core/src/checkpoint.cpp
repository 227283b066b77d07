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

#include "duet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "duet/error.hpp"
#include "json.hpp"

namespace duet {
namespace {

using nlohmann::json;

json tensors_to_json(const Params& p) {
  json out = json::array();
  p.for_each([&out](const char* name, const auto& t) {
    json entry;
    entry["name"] = name;
    entry["rows"] = t.rows();
    entry["cols"] = t.cols();
    entry["data"] = std::vector<double>(t.data(), t.data() + t.size());
    out.push_back(std::move(entry));
  });
  return out;
}

void tensors_from_json(const json& arr, Params& p) {
  size_t k = 0;
  p.for_each([&](const char* name, auto& t) {
    if (k >= arr.size()) throw InputError("checkpoint is missing tensor " + std::string(name));
    const json& entry = arr[k++];
    if (entry.at("name").get<std::string>() != name || entry.at("rows").get<Eigen::Index>() != t.rows() ||
        entry.at("cols").get<Eigen::Index>() != t.cols()) {
      throw InputError("checkpoint tensor " + entry.at("name").get<std::string>() +
                       " does not match expected " + name);
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != t.size()) {
      throw InputError("checkpoint tensor " + std::string(name) + " has wrong element count");
    }
    std::copy(data.begin(), data.end(), t.data());
  });
  if (k != arr.size()) throw InputError("checkpoint has unexpected extra tensors");
}

json config_to_json(const NetConfig& c) {
  return {{"d", c.d},
          {"d_desc", c.d_desc},
          {"d_model", c.d_model},
          {"n_cont_tokens_max", c.n_cont_tokens_max},
          {"layers", c.layers},
          {"vocab_size", c.vocab_size},
          {"n_frames", c.n_frames},
          {"seed", c.seed}};
}

NetConfig config_from_json(const json& j) {
  NetConfig c;
  c.d = j.at("d");
  c.d_desc = j.at("d_desc");
  c.d_model = j.at("d_model");
  c.n_cont_tokens_max = j.at("n_cont_tokens_max");
  c.layers = j.at("layers");
  c.vocab_size = j.at("vocab_size");
  c.n_frames = j.at("n_frames");
  c.seed = j.at("seed");
  c.validate();
  return c;
}

}  // namespace

Checkpoint Checkpoint::from_trainer(const Trainer& trainer) {
  Checkpoint c;
  c.config = trainer.config();
  c.schedule_steps = trainer.schedule().steps();
  c.beta_min = trainer.schedule().beta_min();
  c.beta_max = trainer.schedule().beta_max();
  c.options = trainer.options();
  c.params = trainer.params();
  c.adam = trainer.adam_state();
  c.rng = trainer.rng();
  return c;
}

Trainer Checkpoint::to_trainer() const {
  return Trainer(config, params, adam, schedule(), options, rng);
}

std::string encode_checkpoint(const Checkpoint& c) {
  json j;
  j["format"] = "duet-checkpoint";
  j["version"] = Checkpoint::kVersion;
  j["config"] = config_to_json(c.config);
  j["schedule"] = {{"steps", c.schedule_steps}, {"beta_min", c.beta_min}, {"beta_max", c.beta_max}};
  j["trainer"] = {{"dropout_p", c.options.dropout_p},
                  {"learning_rate", c.options.adam.learning_rate},
                  {"beta1", c.options.adam.beta1},
                  {"beta2", c.options.adam.beta2},
                  {"epsilon", c.options.adam.epsilon},
                  {"weight_decay", c.options.adam.weight_decay},
                  {"step", c.adam.step}};
  std::ostringstream rng_state;
  rng_state << c.rng;
  j["rng"] = rng_state.str();
  j["params"] = tensors_to_json(c.params);
  j["adam_m"] = tensors_to_json(c.adam.first_moment);
  j["adam_v"] = tensors_to_json(c.adam.second_moment);
  return j.dump(1);
}

Checkpoint decode_checkpoint(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "duet-checkpoint") throw InputError("not a duet checkpoint");
    if (j.at("version").get<int>() != Checkpoint::kVersion) {
      throw InputError("unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint c;
    c.config = config_from_json(j.at("config"));
    c.schedule_steps = j.at("schedule").at("steps");
    c.beta_min = j.at("schedule").at("beta_min");
    c.beta_max = j.at("schedule").at("beta_max");
    const json& tr = j.at("trainer");
    c.options.dropout_p = tr.at("dropout_p");
    c.options.adam.learning_rate = tr.at("learning_rate");
    c.options.adam.beta1 = tr.at("beta1");
    c.options.adam.beta2 = tr.at("beta2");
    c.options.adam.epsilon = tr.at("epsilon");
    c.options.adam.weight_decay = tr.at("weight_decay");
    std::istringstream rng_state(j.at("rng").get<std::string>());
    rng_state >> c.rng;
    if (!rng_state) throw InputError("checkpoint RNG state is malformed");

    c.params = Params::init(c.config);
    tensors_from_json(j.at("params"), c.params);
    c.adam = AdamState::for_params(c.params);
    c.adam.step = tr.at("step");
    tensors_from_json(j.at("adam_m"), c.adam.first_moment);
    tensors_from_json(j.at("adam_v"), c.adam.second_moment);
    return c;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out << encode_checkpoint(checkpoint);
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace duet
