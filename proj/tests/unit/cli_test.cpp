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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "duet/error.hpp"
#include "support/fixtures.hpp"

namespace duet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "duet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

TEST(RunConfig, DefaultsAndTypes) {
  RunConfig c;
  EXPECT_EQ(c.get_int("schedule.steps"), 1000);
  EXPECT_EQ(c.get_real("guidance.w_cont"), 7.0);
  EXPECT_TRUE(c.get_bool("sample.svg"));
  EXPECT_EQ(c.get_real_list("sweep.w_desc"), (std::vector<double>{5, 7, 9}));
  EXPECT_TRUE(c.get_string_list("curate.speech_sources").empty());
  EXPECT_THROW(c.get_real("world.kind"), InputError);
  EXPECT_THROW(c.get_int("nope"), InputError);
}

TEST(RunConfig, SetValidates) {
  RunConfig c;
  c.set("train.lr = 0.5");
  EXPECT_EQ(c.get_real("train.lr"), 0.5);
  EXPECT_THROW(c.set("train.steps=1.5"), InputError);
  EXPECT_THROW(c.set("sample.svg=maybe"), InputError);
  EXPECT_THROW(c.set("train.lr"), InputError);
  EXPECT_THROW(c.set("bogus.key=1"), InputError);
}

TEST(RunConfig, FileWithIncludeAndComments) {
  const auto dir = testing::make_temp_dir("config");
  std::ofstream(dir / "base.conf") << "# base\ntrain.steps = 10\nguidance.w_desc = 3\n";
  std::ofstream(dir / "run.conf") << "@include base.conf\n\ntrain.steps = 20  \nsweep.w_cont = 0, 1.5\n";
  const RunConfig c = RunConfig::load(dir / "run.conf");
  EXPECT_EQ(c.get_int("train.steps"), 20);
  EXPECT_EQ(c.get_real("guidance.w_desc"), 3.0);
  EXPECT_EQ(c.get_real_list("sweep.w_cont"), (std::vector<double>{0, 1.5}));

  std::ofstream(dir / "loop.conf") << "@include loop.conf\n";
  EXPECT_THROW(RunConfig::load(dir / "loop.conf"), InputError);
  std::ofstream(dir / "bad.conf") << "no equals sign\n";
  EXPECT_THROW(RunConfig::load(dir / "bad.conf"), InputError);
  EXPECT_THROW(RunConfig::load(dir / "missing.conf"), InputError);
}

TEST(RunConfig, DumpRoundTrips) {
  RunConfig c;
  c.set("seed=42");
  c.set("curate.speech_sources=a, b");
  const auto dir = testing::make_temp_dir("config-dump");
  std::ofstream(dir / "dump.conf") << c.dump();
  EXPECT_EQ(RunConfig::load(dir / "dump.conf").dump(), c.dump());
}

TEST(RunConfig, EnvironmentOverridesFile) {
  RunConfig c;
  c.set("asr.primary=replay:a.jsonl");
  ::setenv("DUET_ASR_PRIMARY", "replay:b.jsonl", 1);
  c.apply_env();
  ::unsetenv("DUET_ASR_PRIMARY");
  EXPECT_EQ(c.get_string("asr.primary"), "replay:b.jsonl");
}

TEST(Builders, WorldAndSchedule) {
  RunConfig c;
  EXPECT_EQ(make_world(c).desc_labels(), 3);
  c.set("world.kind=unknown");
  EXPECT_THROW(make_world(c), InputError);
  c.set("schedule.steps=0");
  EXPECT_THROW(make_run_schedule(c), InvalidRangeError);
}

TEST(Commands, SampleIsByteIdenticalOnRerun) {
  const auto dir = testing::make_temp_dir("sample");
  RunConfig c;
  c.set("sample.count=64");
  c.set("sample.n_steps=20");
  std::ostringstream log;
  cmd_sample(c, dir / "a", log);
  cmd_sample(c, dir / "b", log);
  for (const char* f : {"latents.csv", "latents.svg", "config.txt"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  c.set("seed=1");
  cmd_sample(c, dir / "c", log);
  EXPECT_NE(slurp(dir / "a" / "latents.csv"), slurp(dir / "c" / "latents.csv"));
}

TEST(Commands, SweepIsByteIdenticalAcrossRerunsAndWorkers) {
  const auto dir = testing::make_temp_dir("sweep");
  RunConfig c;
  c.set("sweep.w_desc=0, 5");
  c.set("sweep.w_cont=0, 5");
  c.set("sweep.count=45");
  c.set("sweep.reference_count=45");
  c.set("sample.n_steps=20");
  std::ostringstream log;
  const auto cells = cmd_sweep(c, dir / "a", log);
  ASSERT_EQ(cells.size(), 4u);
  cmd_sweep(c, dir / "b", log);
  c.set("sweep.workers=3");
  cmd_sweep(c, dir / "c", log);
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
  EXPECT_EQ(slurp(dir / "a" / "sweep.svg"), slurp(dir / "b" / "sweep.svg"));
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "c" / "sweep.csv"));
  for (const auto& cell : cells) {
    EXPECT_TRUE(std::isfinite(cell.fad));
    EXPECT_GE(cell.kl, 0.0);
    EXPECT_GE(cell.content_error_rate, 0.0);
    EXPECT_LE(cell.content_error_rate, 1.0);
  }
}

TEST(Commands, EvalMatchesHandComputedValues) {
  const auto dir = testing::make_temp_dir("eval");
  RunConfig c;
  c.set("eval.fixture", (testing::fixture_dir() / "eval" / "fixture.json").string());
  std::ostringstream log;
  cmd_eval(c, dir, log);
  const json m = json::parse(slurp(dir / "metrics.json"));
  EXPECT_EQ(m["wer"]["items"][0]["wer"].get<double>(), 0.0);
  EXPECT_NEAR(m["wer"]["items"][1]["wer"].get<double>(), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(m["wer"]["items"][2]["wer"].get<double>(), 0.5);
  EXPECT_NEAR(m["wer"]["corpus_wer"].get<double>(), 3.0 / 11.0, 1e-15);
  EXPECT_EQ(m["delta_wer"]["items"][0]["delta_wer"].get<double>(), 0.25);
  EXPECT_EQ(m["delta_wer"]["items"][1]["delta_wer"].get<double>(), 0.0);
  EXPECT_NEAR(m["kl"]["items"][0]["kl"].get<double>(), std::log(2.0), 1e-12);
  EXPECT_NEAR(m["kl"]["items"][1]["kl"].get<double>(), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(m["frechet"]["items"][0]["frechet"].get<double>(), 4.0 + std::pow(std::sqrt(2.0) - 2.0, 2), 1e-9);
  EXPECT_NEAR(m["cosine"]["items"][0]["cosine"].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m["cosine"]["items"][1]["cosine"].get<double>(), 1.0, 1e-15);
}

TEST(RunCli, OracleCheckSucceeds) {
  const auto dir = testing::make_temp_dir("cli-oracle");
  EXPECT_EQ(run({"--out", dir.string(), "--set", "oracle_check.samples=50", "oracle-check"}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "oracle_check.json"));
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
}

TEST(RunCli, InputErrorsExitOne) {
  const auto dir = testing::make_temp_dir("cli-errors");
  std::string err;
  EXPECT_EQ(run({"--out", dir.string(), "--set", "no.such.key=1", "sample"}, &err), kExitInput);
  const json e = json::parse(err);
  EXPECT_EQ(e["error"]["exit_code"], kExitInput);
  EXPECT_EQ(e["error"]["command"], "sample");
  EXPECT_TRUE(fs::exists(dir / "error.json"));

  EXPECT_EQ(run({"--out", dir.string(), "--set", "sample.desc=7", "sample"}), kExitInput);
  EXPECT_EQ(run({"--out", dir.string(), "eval"}), kExitInput);
  EXPECT_EQ(run({"frobnicate"}), kExitInput);
  EXPECT_EQ(run({}), kExitInput);
}

TEST(RunCli, MissingCheckpointIsRuntimeOrInput) {
  const auto dir = testing::make_temp_dir("cli-ckpt");
  const int code = run({"--out", dir.string(), "sample", "--mode", "checkpoint", "--checkpoint",
                        (dir / "missing.json").string()});
  EXPECT_NE(code, kExitOk);
}

TEST(RunCli, CurateWithReplayRecognizers) {
  const auto dir = testing::make_temp_dir("cli-curate");
  const auto manifest = testing::materialize_curation_fixture(dir / "data");
  const auto fx = testing::fixture_dir() / "curation";
  const int code = run({"--config", (fx / "rules.conf").string(), "--out", (dir / "out").string(),
                        "--set", "asr.primary=replay:" + (fx / "primary.jsonl").string(),
                        "--set", "asr.secondary=replay:" + (fx / "secondary.jsonl").string(),
                        "curate", "--manifest", manifest.string()});
  ASSERT_EQ(code, kExitOk);
  const auto expected = testing::curation_fixture_expected();
  std::ifstream in(dir / "out" / "manifest.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const SegmentRecord r = record_from_json_line(line);
    EXPECT_EQ(r.label, expected.at(r.id).label) << r.id;
    ++n;
  }
  EXPECT_EQ(n, expected.size());
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["counts"]["total"], 20);
}

TEST(Commands, ShortTrainingRunWritesArtifacts) {
  const auto dir = testing::make_temp_dir("train");
  RunConfig c;
  c.set("train.steps=30");
  c.set("train.log_every=10");
  std::ostringstream log;
  cmd_train(c, dir / "a", log);
  for (const char* f : {"loss.csv", "loss.svg", "checkpoint.json", "summary.json", "config.txt"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  cmd_train(c, dir / "b", log);
  EXPECT_EQ(slurp(dir / "a" / "checkpoint.json"), slurp(dir / "b" / "checkpoint.json"));

  c.set("sample.mode=checkpoint");
  c.set("sample.checkpoint", (dir / "a" / "checkpoint.json").string());
  c.set("sample.count=8");
  c.set("sample.n_steps=5");
  cmd_sample(c, dir / "s", log);
  EXPECT_TRUE(fs::exists(dir / "s" / "latents.csv"));
}

}  // namespace
}  // namespace duet::cli
