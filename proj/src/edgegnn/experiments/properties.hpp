// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/gnn/model.hpp"
#include "edgegnn/gnn/permutation.hpp"

namespace edgegnn {

/// One checked property. `value` is the measured quantity and `threshold` the
/// bound it is compared against; `margin` is positive when the check passes
/// with room to spare.
struct PropertyResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;

  double margin() const { return threshold - value; }
};

nlohmann::json to_json(const PropertyResult& r);

struct PropertyReport {
  std::vector<PropertyResult> results;

  bool all_passed() const;
  std::vector<std::string> failures() const;
};

nlohmann::json to_json(const PropertyReport& r);

/// Largest relative deviation max|a - b| / max|a| between
/// forward(permuted instance) and permuted(forward(instance)).
template <class T>
double equivariance_error(const ModelParams<T>& params, const ProblemInstance& inst, const PermutationPair& perm,
                          const ForwardOptions& options = {});

struct EquivarianceOptions {
  int trials = 100;
  int M = 4, K = 3, N = 2;
  std::uint64_t seed = 0;
  ForwardOptions forward;
};

/// Random instance and permutation pair per trial with the given parameters
/// (32-bit run as given, 64-bit run on the widened copy).
PropertyResult check_equivariance_f32(const ModelParams<float>& params, const EquivarianceOptions& options);
PropertyResult check_equivariance_f64(const ModelParams<double>& params, const EquivarianceOptions& options);

/// Per-layer checks on random layer states: permuting the input state
/// permutes the BS, UE and edge updates identically, compared with ==.
/// Counts mismatching elements over all trials.
PropertyResult check_layer_equivariance(const ModelParams<float>& params, const EquivarianceOptions& options);

struct GradientCheckOptions {
  int d = 8;
  int M = 2, K = 2, N = 2;
  int batch = 2;
  std::uint64_t seed = 0;
  double tolerance = 1e-3;
  double required_fraction = 0.95;
};

/// Tape gradient of the batch loss against central differences, 64-bit,
/// over every parameter coordinate of a size-reduced model.
PropertyResult check_gradient(const GradientCheckOptions& options);

/// Post-projection per-BS power never exceeds the budget by more than 1e-6.
PropertyResult check_feasibility(const ModelParams<float>& params, const EquivarianceOptions& options);

/// log2(1 + (sum_m sqrt(P_m) ||h_m||)^2 / sigma^2), the optimum for K = 1.
/// With M = 1 this is log2(1 + P ||h||^2 / sigma^2).
double single_user_optimum(const ProblemInstance& inst);

struct SolverCheckOptions {
  int single_user_instances = 50;
  int single_user_M = 1;
  double single_user_tol = 1e-3;
  int monotone_instances = 100;
  int M = 3, K = 2, N = 2;
  double monotone_slack = 1e-9;
  double power_slack = 1e-6;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Single-user optimum gap for GP and for WMMSE, WMMSE trace monotonicity and
/// power feasibility of every solver output.
std::vector<PropertyResult> check_solvers(const SolverCheckOptions& options);

/// Joint rescaling of channels by c and noise by c^2 keeps every SINR;
/// raw and normalized instances give the same sum rate; relabeling BSs and UEs
/// keeps the sum rate.
std::vector<PropertyResult> check_scale_invariance(int trials, std::uint64_t seed);

struct VerifyOptions {
  EquivarianceOptions equivariance;
  GradientCheckOptions gradient;
  SolverCheckOptions solvers;
  int scale_trials = 100;
  bool include_solvers = true;
  bool include_gradient = true;
};

/// Full suite on the given parameters.
PropertyReport run_verify(const ModelParams<float>& params, const VerifyOptions& options);

}  // namespace edgegnn
