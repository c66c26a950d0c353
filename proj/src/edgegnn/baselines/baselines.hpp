// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgegnn/objective/objective.hpp"

namespace edgegnn {

struct SolverReport {
  std::string solver;
  int instance_id = -1;
  Beamformer V;
  /// Sum rate of the initial point followed by one entry per iteration.
  std::vector<double> objective_trace;
  int iterations = 0;
  double wall_time = 0.0;
  bool converged = false;
  bool feasible = false;
  std::string note;

  double final_rate() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// v_{m,k} = h_{m,k} sqrt(P_m / (K ||h_{m,k}||^2)); zero where h_{m,k} = 0.
Beamformer matched_filter_init(const ProblemInstance& inst);

struct GpOptions {
  int max_iters = 500;
  double tol = 1e-5;
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 30;
  std::optional<Beamformer> init;
};

/// Projected gradient ascent on the sum rate with Armijo backtracking along
/// the projection arc. Every accepted step is non-decreasing by construction.
SolverReport gp_solve(const ProblemInstance& inst, const GpOptions& options = {});

struct MultiplierOptions {
  int max_cycles = 50;
  /// Relative gap |P_m - p_m| / P_m at which a single bisection stops.
  double bisection_tol = 1e-12;
  /// Relative complementary-slackness gap accepted at the end of a cycle.
  double cycle_tol = 1e-10;
};

struct MultiplierResult {
  std::vector<double> mu;
  Beamformer V;
  bool converged = false;
  int cycles = 0;
};

/// Per-BS Lagrange multipliers for the WMMSE beamformer update with receiver
/// scalars `u` and weights `w` held fixed. Cyclic coordinate bisection: each
/// mu_m stays 0 when BS m's constraint is slack, otherwise it is bisected until
/// BS m meets its budget; cycles repeat until every constraint holds.
MultiplierResult multiplier_search(const ProblemInstance& inst, std::span<const cdouble> u,
                                   std::span<const double> w, const MultiplierOptions& options = {});

struct WmmseOptions {
  int max_iters = 100;
  double tol = 1e-5;
  std::optional<Beamformer> init;
  MultiplierOptions multipliers;
};

SolverReport wmmse_solve(const ProblemInstance& inst, const WmmseOptions& options = {});

}  // namespace edgegnn
