// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/experiments/spec.hpp"

namespace edgegnn {

enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitArgument = 2,
  kExitNumeric = 3,
  kExitIo = 4,
  kExitInternal = 5,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Receives human-readable progress lines.
using LogSink = std::function<void(const std::string&)>;

struct CommandResult {
  int exit_code = kExitOk;
  /// Short machine-readable summary, also printed by the CLI.
  nlohmann::json summary = nlohmann::json::object();
};

CommandResult cmd_generate(const ExperimentSpec& spec, const LogSink& log = {});
CommandResult cmd_train(const ExperimentSpec& spec, const LogSink& log = {});
CommandResult cmd_baseline(const ExperimentSpec& spec, const LogSink& log = {});
CommandResult cmd_sweep(const ExperimentSpec& spec, const LogSink& log = {});
CommandResult cmd_verify(const ExperimentSpec& spec, const LogSink& log = {});
CommandResult cmd_evaluate(const ExperimentSpec& spec, const LogSink& log = {});

/// Resolves the spec and dispatches. Exceptions propagate.
CommandResult run_command(const std::string& command, const nlohmann::json& config, const nlohmann::json& flags,
                          const LogSink& log = {});

nlohmann::json to_json(const SolverReport& r);
SolverReport solver_report_from_json(const nlohmann::json& j);

struct SolverRun {
  std::vector<SolverReport> reports;
  /// Per-instance wall time (median over repeats when timing is requested).
  std::vector<double> times;
  /// Instance ids whose solve threw; their reports carry the message in `note`.
  std::vector<int> failures;
};

struct SolverRunOptions {
  int max_iters = 0;  ///< 0 keeps the solver default
  double tol = 1e-5;
  int jobs = 1;
  /// > 0 times each instance as the median of this many single-threaded runs.
  int timing_repeats = 0;
};

/// Runs `solver` ("wmmse" or "gp") on every instance. Report i gets instance id i.
SolverRun run_solver(const std::string& solver, const std::vector<ProblemInstance>& instances,
                     const SolverRunOptions& options);

/// Test set of a sweep point or an evaluation: `count` instances of size
/// (M, K, N) seeded from (seed, M, K).
std::vector<ProblemInstance> test_instances(int M, int K, int N, int count, std::uint64_t seed,
                                            const ScenarioOptions& scenario = {});

/// "x.json" -> "x" + suffix, otherwise path + suffix.
std::string sibling_path(const std::string& path, const std::string& suffix);

}  // namespace edgegnn
