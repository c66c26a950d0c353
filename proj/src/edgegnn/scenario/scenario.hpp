// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "edgegnn/scenario/instance.hpp"

namespace edgegnn {

struct ScenarioOptions {
  double area_side_m = 2000.0;
  double min_bs_distance_m = 500.0;
  double power_budget_dbm = 33.0;
  double noise_dbm = -99.0;
  /// Candidate BS draws allowed per layout before giving up.
  int max_placement_attempts = 10000;
};

/// Network layout: positions in meters inside the square [0, side]^2.
struct Scenario {
  int M = 0;
  int K = 0;
  int N = 0;
  std::vector<std::array<double, 2>> bs_positions;
  std::vector<std::array<double, 2>> ue_positions;
  std::vector<double> power_budget_dbm;
  std::vector<double> noise_dbm;
};

/// 30.5 + 36.7 log10(d), d in meters.
double path_loss_db(double distance_m);
double dbm_to_watt(double dbm);

/// UEs uniform on the square; BSs by rejection sampling until every pair is
/// at least `min_bs_distance_m` apart.
Scenario sample_scenario(int M, int K, int N, std::uint64_t seed, const ScenarioOptions& options = {});

/// Channels h = sqrt(g) w with g the linear path gain and w ~ CN(0, I_N),
/// without noise normalization.
ProblemInstance realize_channels_raw(const Scenario& scenario, std::uint64_t seed);

/// realize_channels_raw followed by normalize_instance.
ProblemInstance realize_channels(const Scenario& scenario, std::uint64_t seed);

/// Rescales channels by alpha = 1/sqrt(sigma^2) so every noise power becomes 1.
/// With unequal noise powers alpha uses their mean and the residual noise
/// powers are kept, with `heterogeneous_noise` set.
ProblemInstance normalize_instance(ProblemInstance raw);

/// Convenience: fresh scenario plus channels from derived seeds.
ProblemInstance sample_instance(int M, int K, int N, std::uint64_t seed, const ScenarioOptions& options = {});

}  // namespace edgegnn
