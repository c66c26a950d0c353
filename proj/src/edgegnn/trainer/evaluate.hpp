// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/gnn/model.hpp"

namespace edgegnn {

struct EvaluateOptions {
  /// Per-instance inference time is the median of this many single-threaded runs; 0 skips timing.
  int timing_repeats = 5;
  int jobs = 1;
  ForwardOptions forward;
};

struct InstanceEvaluation {
  int id = 0;
  double sum_rate = 0.0;
  double time_s = 0.0;
  bool feasible = true;
};

struct BaselineComparison {
  std::string solver;
  int joined = 0;
  double mean_rate = 0.0;
  double mean_delta = 0.0;  ///< mean of (GNN rate - solver rate) over joined instances
  double rate_ratio = 0.0;  ///< GNN mean / solver mean over joined instances
};

struct EvaluationReport {
  std::vector<InstanceEvaluation> instances;
  double mean_rate = 0.0;
  double std_rate = 0.0;  ///< population standard deviation
  double mean_time_s = 0.0;
  double median_time_s = 0.0;
  int feasibility_violations = 0;
  std::vector<BaselineComparison> baselines;
};

using BaselineSet = std::pair<std::string, std::vector<SolverReport>>;

/// Runs the model on every instance; never modifies the parameters. Baseline
/// reports are joined on instance id (their position in `instances` when the
/// report carries no id).
EvaluationReport evaluate(const InferenceModel<float>& model, std::span<const ProblemInstance> instances,
                          const EvaluateOptions& options = {}, const std::vector<BaselineSet>& baselines = {});

/// Timing fields are omitted when include_timing is false, which keeps the
/// payload reproducible byte for byte.
nlohmann::json to_json(const EvaluationReport& report, bool include_timing = true);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> xs);

}  // namespace edgegnn
