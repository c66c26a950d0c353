// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "edgegnn/errors.hpp"
#include "edgegnn/experiments/commands.hpp"
#include "edgegnn/experiments/properties.hpp"
#include "edgegnn/experiments/spec.hpp"
#include "edgegnn/gnn/checkpoint.hpp"
#include "edgegnn/scenario/instance_io.hpp"

namespace edgegnn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("edgegnn_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  CommandResult run(const std::string& cmd, const json& flags) { return run_command(cmd, json::object(), flags); }

  json tiny_train_flags(const std::string& out) const {
    return {{"out", out}, {"d", 8}, {"L", 1}, {"epochs", 2}, {"minibatches", 2}, {"batch_size", 4}, {"seed", 5}};
  }

  fs::path dir;
};

TEST(Spec, DefaultsConfigAndFlagPrecedence) {
  auto s = resolve_spec("generate");
  EXPECT_EQ(s.get<int>("M"), 3);
  s = resolve_spec("generate", {{"M", 5}, {"K", 4}}, {{"M", 6}});
  EXPECT_EQ(s.get<int>("M"), 6);
  EXPECT_EQ(s.get<int>("K"), 4);
}

TEST(Spec, ConfigMayCarryOtherCommandsKeys) {
  auto s = resolve_spec("generate", {{"epochs", 7}, {"count", 3}});
  EXPECT_EQ(s.get<int>("count"), 3);
  EXPECT_FALSE(s.has("epochs"));
}

TEST(Spec, FlagsAreStrict) {
  EXPECT_THROW(resolve_spec("generate", json::object(), {{"epochs", 7}}), ArgumentError);
  EXPECT_THROW(resolve_spec("generate", {{"nonsense", 1}}), ArgumentError);
  EXPECT_THROW(resolve_spec("generate", json::object(), {{"M", "three"}}), ArgumentError);
}

TEST(Spec, RangeChecks) {
  EXPECT_THROW(resolve_spec("generate", json::object(), {{"K", 0}}), ArgumentError);
  EXPECT_THROW(resolve_spec("train", json::object(), {{"rmsprop_decay", 1.0}}), ArgumentError);
  EXPECT_THROW(resolve_spec("baseline", json::object(), {{"instances", "x.json"}, {"solver", "newton"}}), ArgumentError);
  EXPECT_THROW(resolve_spec("baseline"), ArgumentError);
  EXPECT_THROW(resolve_spec("verify", json::object(), {{"fault", "bogus"}}), ArgumentError);
  EXPECT_THROW(resolve_spec("launch"), ArgumentError);
}

TEST(Spec, TrainConfigConversion) {
  auto s = resolve_spec("train", json::object(), {{"learning_rate", 1e-3}, {"M", 4}, {"d", 16}, {"seed", 9}});
  auto cfg = train_config_from_spec(s);
  EXPECT_EQ(cfg.learning_rate, 1e-3);
  EXPECT_EQ(cfg.M_train, 4);
  EXPECT_EQ(cfg.model.d, 16);
  EXPECT_EQ(cfg.seed, 9u);
}

TEST(ExitCodes, MapExceptionKinds) {
  EXPECT_EQ(exit_code_for(ArgumentError("x")), kExitArgument);
  EXPECT_EQ(exit_code_for(NumericError("x")), kExitNumeric);
  EXPECT_EQ(exit_code_for(IoError("x")), kExitIo);
  EXPECT_EQ(exit_code_for(std::logic_error("x")), kExitInternal);
}

TEST(Paths, SiblingPath) {
  EXPECT_EQ(sibling_path("a/model.json", ".log.jsonl"), "a/model.log.jsonl");
  EXPECT_EQ(sibling_path("model", ".bin"), "model.bin");
}

TEST_F(CommandTest, GenerateIsByteIdenticalAndEchoesSpec) {
  // The echoed spec holds the output path, so both runs write the same file.
  const json flags = {{"out", path("a.json")}, {"M", 5}, {"K", 2}, {"count", 100}, {"seed", 3}};
  run("generate", flags);
  const std::string a = read_text_file(path("a.json"));
  run("generate", flags);
  EXPECT_TRUE(a == read_text_file(path("a.json")));
  auto batch = read_instance_batch(path("a.json"));
  ASSERT_EQ(batch.instances.size(), 100u);
  EXPECT_EQ(batch.instances[0].M, 5);
  EXPECT_EQ(batch.spec["values"]["seed"], 3);
  EXPECT_EQ(batch.spec["values"]["count"], 100);
}

TEST_F(CommandTest, GenerateJobsDoNotChangeOutput) {
  run("generate", {{"out", path("a.json")}, {"count", 20}, {"jobs", 1}});
  run("generate", {{"out", path("b.json")}, {"count", 20}, {"jobs", 3}});
  // The echoed spec records jobs; the instances must agree.
  auto a = read_instance_batch(path("a.json"));
  auto b = read_instance_batch(path("b.json"));
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.instances[i].channels, b.instances[i].channels);
}

TEST_F(CommandTest, TrainWritesOneLogLinePerEpochAndResumes) {
  const std::string ck = path("model.json");
  auto r = run("train", tiny_train_flags(ck));
  EXPECT_EQ(r.exit_code, 0);
  auto log = lines_of(read_text_file(path("model.log.jsonl")));
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(json::parse(log[1])["epoch"], 2);
  auto meta = load_checkpoint(ck).metadata;
  EXPECT_EQ(meta["epochs_done"], 2);
  EXPECT_EQ(meta["spec"]["values"]["seed"], 5);

  auto flags = tiny_train_flags(ck);
  flags["epochs"] = 4;
  flags["resume"] = ck;
  run("train", flags);
  log = lines_of(read_text_file(path("model.log.jsonl")));
  ASSERT_EQ(log.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(json::parse(log[i])["epoch"], i + 1);
}

TEST_F(CommandTest, ResumedTrainingMatchesUninterrupted) {
  auto full = tiny_train_flags(path("full.json"));
  full["epochs"] = 3;
  auto a = run("train", full);
  auto part = tiny_train_flags(path("part.json"));
  part["epochs"] = 1;
  run("train", part);
  part["epochs"] = 3;
  part["resume"] = path("part.json");
  auto b = run("train", part);
  EXPECT_EQ(a.summary["params_fingerprint"], b.summary["params_fingerprint"]);
}

TEST_F(CommandTest, TrainTwiceGivesIdenticalCheckpoint) {
  run("train", tiny_train_flags(path("a.json")));
  const std::string manifest = read_text_file(path("a.json"));
  const std::string blob = read_text_file(path("a.bin"));
  run("train", tiny_train_flags(path("a.json")));
  EXPECT_TRUE(manifest == read_text_file(path("a.json")));
  EXPECT_TRUE(blob == read_text_file(path("a.bin")));
}

TEST_F(CommandTest, BaselineWritesReportPerInstance) {
  run("generate", {{"out", path("inst.json")}, {"count", 10}});
  auto r = run("baseline", {{"instances", path("inst.json")}, {"out", path("wmmse.json")}});
  EXPECT_EQ(r.exit_code, 0);
  auto j = json::parse(read_text_file(path("wmmse.json")));
  ASSERT_EQ(j["reports"].size(), 10u);
  for (const auto& rep : j["reports"]) {
    EXPECT_FALSE(rep["failed"].get<bool>());
    const auto trace = rep["objective_trace"].get<std::vector<double>>();
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-9);
  }
  EXPECT_EQ(j["spec"]["values"]["solver"], "wmmse");
  EXPECT_EQ(j["instance_spec"]["values"]["count"], 10);
}

TEST_F(CommandTest, BaselineFlagsBrokenInstances) {
  std::vector<ProblemInstance> set;
  for (int i = 0; i < 3; ++i) set.push_back(sample_instance(3, 2, 2, i));
  set[1].channels[0] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  auto run = run_solver("wmmse", set, SolverRunOptions{});
  EXPECT_EQ(run.failures, (std::vector<int>{1}));
  EXPECT_EQ(run.reports.size(), 3u);
  EXPECT_FALSE(run.reports[1].note.empty());
}

TEST_F(CommandTest, BaselineSingleUserSolversAgree) {
  std::vector<ProblemInstance> set;
  for (int i = 0; i < 5; ++i) set.push_back(sample_instance(1, 1, 2, i));
  auto w = run_solver("wmmse", set, SolverRunOptions{});
  auto g = run_solver("gp", set, SolverRunOptions{});
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w.reports[i].final_rate(), g.reports[i].final_rate(), 1e-3);
  EXPECT_THROW(run_solver("newton", set, SolverRunOptions{}), ArgumentError);
}

TEST_F(CommandTest, MissingInstanceFileIsIoError) {
  EXPECT_THROW(run("baseline", {{"instances", path("none.json")}}), IoError);
}

TEST_F(CommandTest, SweepCoversEveryPointAndMethod) {
  run("train", tiny_train_flags(path("model.json")));
  json flags = {{"checkpoint", path("model.json")}, {"out", path("sweep.csv")}, {"sweep_k", {2, 4}},
                {"sweep_m", {3, 5}},                {"count", 3},                 {"baselines", {"wmmse", "gp"}},
                {"timing_repeats", 1}};
  run("sweep", flags);
  auto rows = lines_of(read_text_file(path("sweep.csv")));
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0].rfind("# spec: ", 0), 0u);
  EXPECT_EQ(rows[1], "size,method,mean_rate,std_rate,mean_time_s");
  std::map<std::string, std::set<std::string>> methods;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto comma = rows[i].find(',');
    const auto next = rows[i].find(',', comma + 1);
    methods[rows[i].substr(0, comma)].insert(rows[i].substr(comma + 1, next - comma - 1));
  }
  // (3,2) is shared by both sweeps and appears once.
  EXPECT_EQ(methods.size(), 3u);
  for (const auto& [size, m] : methods) EXPECT_EQ(m, (std::set<std::string>{"edge_gnn", "wmmse", "gp"})) << size;
  EXPECT_TRUE(methods.count("M3K4"));
  EXPECT_TRUE(methods.count("M5K2"));
}

TEST_F(CommandTest, SweepRejectsAntennaMismatch) {
  run("train", tiny_train_flags(path("model.json")));
  EXPECT_THROW(run("sweep", {{"checkpoint", path("model.json")}, {"N", 4}, {"count", 2}}), ArgumentError);
}

TEST_F(CommandTest, VerifyPassesOnFreshModelAndCatchesUeIndexedFault) {
  const json base = {{"d", 16}, {"trials", 5}, {"solver_instances", 5}, {"grad_check_d", 4}};
  auto ok = run("verify", base);
  EXPECT_EQ(ok.exit_code, kExitOk) << ok.summary.dump();
  json tied = base;
  tied["fault"] = "tie-mlp56";
  EXPECT_EQ(run("verify", tied).exit_code, kExitOk);
  json bad = base;
  bad["fault"] = "ue-indexed-mlp1";
  auto r = run("verify", bad);
  EXPECT_EQ(r.exit_code, kExitPropertyFailure);
  bool listed = false;
  for (const auto& p : r.summary["properties"]) {
    EXPECT_TRUE(p.contains("value") && p.contains("threshold") && p.contains("margin"));
    if (p["name"].get<std::string>().find("equivariance") != std::string::npos && !p["passed"].get<bool>()) listed = true;
  }
  EXPECT_TRUE(listed);
}

TEST_F(CommandTest, EvaluateTransfersToLargerSizesAndJoinsReports) {
  run("train", tiny_train_flags(path("model.json")));
  run("generate", {{"out", path("k4.json")}, {"K", 4}, {"count", 4}});
  run("baseline", {{"instances", path("k4.json")}, {"out", path("k4_wmmse.json")}});
  auto r = run("evaluate", {{"checkpoint", path("model.json")},
                            {"instances", path("k4.json")},
                            {"reports", {path("k4_wmmse.json")}},
                            {"timing_repeats", 0},
                            {"out", path("eval.json")}});
  EXPECT_EQ(r.exit_code, 0);
  auto j = json::parse(read_text_file(path("eval.json")));
  EXPECT_EQ(j["report"]["instances"].size(), 4u);
  ASSERT_EQ(j["report"]["baselines"].size(), 1u);
  EXPECT_EQ(j["report"]["baselines"][0]["joined"], 4);
  EXPECT_EQ(j["spec"]["values"]["checkpoint"], path("model.json"));
}

}  // namespace
}  // namespace edgegnn
