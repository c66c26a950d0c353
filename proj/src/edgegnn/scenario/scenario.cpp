// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/scenario/scenario.hpp"

#include <cmath>
#include <random>
#include <string>

#include "edgegnn/errors.hpp"
#include "edgegnn/util/seeds.hpp"

namespace edgegnn {

namespace {
// Distances below this are treated as this; the log-distance model diverges at 0.
constexpr double kMinLinkDistanceM = 1.0;
}  // namespace

ProblemInstance::ProblemInstance(int m, int k, int n)
    : M(m),
      K(k),
      N(n),
      channels(static_cast<std::size_t>(m) * k * n),
      power_budget(static_cast<std::size_t>(m), 0.0),
      noise_power(static_cast<std::size_t>(k), 0.0) {}

void ProblemInstance::validate() const {
  if (M < 1 || K < 1 || N < 1) {
    throw ArgumentError("instance sizes must be positive, got M=" + std::to_string(M) + " K=" + std::to_string(K) +
                        " N=" + std::to_string(N));
  }
  if (channels.size() != static_cast<std::size_t>(M) * K * N || power_budget.size() != static_cast<std::size_t>(M) ||
      noise_power.size() != static_cast<std::size_t>(K)) {
    throw DimensionError("instance arrays do not match M, K, N");
  }
  for (double p : power_budget)
    if (!(p > 0.0) || !std::isfinite(p)) throw ArgumentError("power budgets must be positive and finite");
  for (double s : noise_power)
    if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("noise powers must be positive and finite");
  for (const cdouble& h : channels)
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) throw ArgumentError("channels must be finite");
}

double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw ArgumentError("path_loss_db: distance must be positive");
  return 30.5 + 36.7 * std::log10(distance_m);
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

Scenario sample_scenario(int M, int K, int N, std::uint64_t seed, const ScenarioOptions& options) {
  if (M < 1 || K < 1 || N < 1) {
    throw ArgumentError("sample_scenario: M, K, N must be >= 1 (got " + std::to_string(M) + ", " +
                        std::to_string(K) + ", " + std::to_string(N) + ")");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, options.area_side_m);

  Scenario s;
  s.M = M;
  s.K = K;
  s.N = N;
  const double min_d2 = options.min_bs_distance_m * options.min_bs_distance_m;
  int attempts = 0;
  while (static_cast<int>(s.bs_positions.size()) < M) {
    if (attempts++ >= options.max_placement_attempts) {
      throw InfeasibleLayoutError("could not place " + std::to_string(M) + " BSs " +
                                  std::to_string(options.min_bs_distance_m) + " m apart within " +
                                  std::to_string(options.max_placement_attempts) + " attempts");
    }
    const std::array<double, 2> candidate{coord(rng), coord(rng)};
    bool ok = true;
    for (const auto& p : s.bs_positions) {
      const double dx = p[0] - candidate[0], dy = p[1] - candidate[1];
      if (dx * dx + dy * dy < min_d2) {
        ok = false;
        break;
      }
    }
    if (ok) s.bs_positions.push_back(candidate);
  }
  s.ue_positions.reserve(K);
  for (int k = 0; k < K; ++k) s.ue_positions.push_back({coord(rng), coord(rng)});
  s.power_budget_dbm.assign(M, options.power_budget_dbm);
  s.noise_dbm.assign(K, options.noise_dbm);
  return s;
}

ProblemInstance realize_channels_raw(const Scenario& s, std::uint64_t seed) {
  ProblemInstance inst(s.M, s.K, s.N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  for (int m = 0; m < s.M; ++m) {
    for (int k = 0; k < s.K; ++k) {
      const double dx = s.bs_positions[m][0] - s.ue_positions[k][0];
      const double dy = s.bs_positions[m][1] - s.ue_positions[k][1];
      const double d = std::max(std::sqrt(dx * dx + dy * dy), kMinLinkDistanceM);
      const double amplitude = std::sqrt(std::pow(10.0, -path_loss_db(d) / 10.0));
      for (int n = 0; n < s.N; ++n) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        inst.h(m, k, n) = amplitude * cdouble(re, im);
      }
    }
  }
  for (int m = 0; m < s.M; ++m) inst.power_budget[m] = dbm_to_watt(s.power_budget_dbm[m]);
  for (int k = 0; k < s.K; ++k) inst.noise_power[k] = dbm_to_watt(s.noise_dbm[k]);
  inst.channel_seed = seed;
  return inst;
}

ProblemInstance realize_channels(const Scenario& s, std::uint64_t seed) {
  return normalize_instance(realize_channels_raw(s, seed));
}

ProblemInstance normalize_instance(ProblemInstance raw) {
  if (raw.noise_power.empty()) throw ArgumentError("normalize_instance: no noise powers");
  double mean = 0.0;
  bool homogeneous = true;
  for (double s : raw.noise_power) {
    if (!(s > 0.0)) throw ArgumentError("normalize_instance: noise powers must be positive");
    mean += s;
    homogeneous = homogeneous && s == raw.noise_power.front();
  }
  mean /= static_cast<double>(raw.noise_power.size());
  const double reference = homogeneous ? raw.noise_power.front() : mean;
  const double alpha = 1.0 / std::sqrt(reference);
  for (cdouble& h : raw.channels) h *= alpha;
  if (homogeneous) {
    for (double& s : raw.noise_power) s = 1.0;
  } else {
    for (double& s : raw.noise_power) s /= reference;
    raw.heterogeneous_noise = true;
  }
  raw.scale_alpha *= alpha;
  return raw;
}

ProblemInstance sample_instance(int M, int K, int N, std::uint64_t seed, const ScenarioOptions& options) {
  const std::uint64_t layout_seed = derive_seed(seed, {1});
  const std::uint64_t fading_seed = derive_seed(seed, {2});
  ProblemInstance inst = realize_channels(sample_scenario(M, K, N, layout_seed, options), fading_seed);
  inst.scenario_seed = layout_seed;
  return inst;
}

}  // namespace edgegnn
