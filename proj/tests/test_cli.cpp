// SPDX-License-Identifier: Apache-2.0
// Runs the installed command-line binary and checks exit codes and outputs.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = -1;
  std::string output;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(EDGEGNN_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) o.output += buf;
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("edgegnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

TEST_F(Cli, HelpAndVersion) {
  EXPECT_EQ(cli("--help").status, 0);
  auto v = cli("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.output.find("0.1.0"), std::string::npos);
  EXPECT_NE(cli("train --help").output.find("--learning-rate"), std::string::npos);
}

TEST_F(Cli, ArgumentErrorsExitTwo) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("launch").status, 2);
  EXPECT_EQ(cli("generate --out " + at("x.json") + " --K 0").status, 2);
  EXPECT_EQ(cli("generate --bogus 1").status, 2);
  EXPECT_EQ(cli("baseline --instances " + at("x.json") + " --solver newton").status, 2);
}

TEST_F(Cli, MissingFilesExitFour) {
  EXPECT_EQ(cli("baseline --instances " + at("none.json")).status, 4);
  EXPECT_EQ(cli("generate --config " + at("none.json")).status, 4);
}

TEST_F(Cli, GenerateIsReproducible) {
  const std::string args = "generate --M 5 --K 2 --count 100 --seed 4 --out " + at("a.json");
  ASSERT_EQ(cli(args).status, 0);
  const std::string first = slurp(at("a.json"));
  ASSERT_EQ(cli(args).status, 0);
  EXPECT_TRUE(first == slurp(at("a.json")));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(at("cfg.json")) << R"({"M": 4, "K": 3, "count": 2, "epochs": 9})";
  ASSERT_EQ(cli("generate --config " + at("cfg.json") + " --K 5 --out " + at("a.json")).status, 0);
  const std::string text = slurp(at("a.json"));
  EXPECT_NE(text.find("\"K\":5"), std::string::npos);
  EXPECT_NE(text.find("\"M\":4"), std::string::npos);
}

TEST_F(Cli, TrainSmokeAndResume) {
  const std::string base = "train --d 8 --L 1 --minibatches 2 --batch-size 4 --out " + at("m.json");
  ASSERT_EQ(cli(base + " --epochs 2").status, 0);
  auto r = cli(base + " --epochs 3 --resume " + at("m.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("epoch 3"), std::string::npos);
  std::ifstream log(at("m.log.jsonl"));
  int lines = 0;
  for (std::string l; std::getline(log, l);) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST_F(Cli, VerifyFaultExitCodes) {
  const std::string base = "verify --d 8 --trials 3 --solver-instances 3 --grad-check-d 4";
  auto ok = cli(base);
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_NE(ok.output.find("PASS"), std::string::npos);
  auto bad = cli(base + " --fault ue-indexed-mlp1");
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("FAIL"), std::string::npos);
}

}  // namespace
