// SPDX-License-Identifier: Apache-2.0
#include <chrono>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/errors.hpp"

namespace edgegnn {

SolverReport gp_solve(const ProblemInstance& inst, const GpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  inst.validate();
  SolverReport report;
  report.solver = "gp";

  Beamformer V = options.init ? *options.init : matched_filter_init(inst);
  require_matching_shape(inst, V);
  V = project_power(std::move(V), inst.power_budget);
  double f = sum_rate(inst, V);
  report.objective_trace.push_back(f);

  Beamformer grad;
  for (int it = 0; it < options.max_iters; ++it) {
    sum_rate_with_gradient(inst, V, grad);

    bool accepted = false;
    double step = options.initial_step;
    Beamformer candidate;
    double f_candidate = f;
    for (int bt = 0; bt <= options.max_backtracks; ++bt, step *= options.shrink) {
      candidate = V;
      for (std::size_t i = 0; i < candidate.weights.size(); ++i) candidate.weights[i] += step * grad.weights[i];
      candidate = project_power(std::move(candidate), inst.power_budget);
      f_candidate = sum_rate(inst, candidate);
      double directional = 0.0;  // <grad, candidate - V> over real components
      for (std::size_t i = 0; i < V.weights.size(); ++i) {
        const cdouble d = candidate.weights[i] - V.weights[i];
        directional += grad.weights[i].real() * d.real() + grad.weights[i].imag() * d.imag();
      }
      if (f_candidate >= f + options.armijo * directional && f_candidate >= f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.converged = true;
      report.note = "backtracking found no ascent step";
      break;
    }
    const double improvement = f_candidate - f;
    V = std::move(candidate);
    f = f_candidate;
    report.objective_trace.push_back(f);
    ++report.iterations;
    if (improvement < options.tol) {
      report.converged = true;
      break;
    }
  }

  report.V = std::move(V);
  report.feasible = is_feasible(report.V, inst.power_budget);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace edgegnn
