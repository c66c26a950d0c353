// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/trainer/evaluate.hpp"

#include <cmath>
#include <map>

#include "edgegnn/util/parallel.hpp"
#include "edgegnn/util/timing.hpp"

namespace edgegnn {

std::pair<double, double> mean_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

EvaluationReport evaluate(const InferenceModel<float>& model, std::span<const ProblemInstance> instances,
                          const EvaluateOptions& options, const std::vector<BaselineSet>& baselines) {
  EvaluationReport report;
  report.instances.resize(instances.size());
  parallel_for(instances.size(), options.jobs, [&](std::size_t i) {
    const Beamformer V = model.infer(instances[i], options.forward);
    auto& r = report.instances[i];
    r.id = static_cast<int>(i);
    r.sum_rate = sum_rate(instances[i], V);
    r.feasible = is_feasible(V, instances[i].power_budget);
  });
  if (options.timing_repeats > 0) {
    for (std::size_t i = 0; i < instances.size(); ++i)
      report.instances[i].time_s =
          median_time(options.timing_repeats, [&] { (void)model.infer(instances[i], options.forward); });
  }

  std::vector<double> rates, times;
  for (const auto& r : report.instances) {
    rates.push_back(r.sum_rate);
    times.push_back(r.time_s);
    if (!r.feasible) ++report.feasibility_violations;
  }
  std::tie(report.mean_rate, report.std_rate) = mean_std(rates);
  report.mean_time_s = mean_std(times).first;
  report.median_time_s = median(times);

  for (const auto& [solver, reports] : baselines) {
    std::map<int, const SolverReport*> by_id;
    for (std::size_t j = 0; j < reports.size(); ++j)
      by_id[reports[j].instance_id >= 0 ? reports[j].instance_id : static_cast<int>(j)] = &reports[j];
    BaselineComparison cmp;
    cmp.solver = solver;
    double gnn_sum = 0.0, base_sum = 0.0;
    for (const auto& r : report.instances) {
      auto it = by_id.find(r.id);
      if (it == by_id.end()) continue;
      ++cmp.joined;
      gnn_sum += r.sum_rate;
      base_sum += it->second->final_rate();
    }
    if (cmp.joined > 0) {
      cmp.mean_rate = base_sum / cmp.joined;
      cmp.mean_delta = (gnn_sum - base_sum) / cmp.joined;
      cmp.rate_ratio = base_sum > 0.0 ? gnn_sum / base_sum : 0.0;
    }
    report.baselines.push_back(cmp);
  }
  return report;
}

nlohmann::json to_json(const EvaluationReport& report, bool include_timing) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : report.instances) {
    nlohmann::json j = {{"id", r.id}, {"sum_rate", r.sum_rate}, {"feasible", r.feasible}};
    if (include_timing) j["time_s"] = r.time_s;
    per.push_back(j);
  }
  nlohmann::json out = {{"count", report.instances.size()},
                        {"mean_rate", report.mean_rate},
                        {"std_rate", report.std_rate},
                        {"feasibility_violations", report.feasibility_violations},
                        {"instances", per}};
  if (include_timing) {
    out["mean_time_s"] = report.mean_time_s;
    out["median_time_s"] = report.median_time_s;
  }
  nlohmann::json base = nlohmann::json::array();
  for (const auto& b : report.baselines)
    base.push_back({{"solver", b.solver},
                    {"joined", b.joined},
                    {"mean_rate", b.mean_rate},
                    {"mean_delta", b.mean_delta},
                    {"rate_ratio", b.rate_ratio}});
  out["baselines"] = base;
  return out;
}

}  // namespace edgegnn
