// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace edgegnn {

using cdouble = std::complex<double>;

/// One sum-rate problem: channels h_{m,k} in C^N for M base stations and K
/// single-antenna users, per-BS power budgets and per-UE noise powers, all in
/// linear units after normalization.
struct ProblemInstance {
  int M = 0;
  int K = 0;
  int N = 0;
  /// Row-major (m, k, antenna).
  std::vector<cdouble> channels;
  /// f_BS: P_m in watts.
  std::vector<double> power_budget;
  /// f_UE: noise power per UE, on the normalized scale.
  std::vector<double> noise_power;
  /// Amplitude factor applied to the raw channels.
  double scale_alpha = 1.0;
  /// Set when per-UE noise powers differ, so they could not all be scaled to 1.
  bool heterogeneous_noise = false;
  std::uint64_t scenario_seed = 0;
  std::uint64_t channel_seed = 0;

  ProblemInstance() = default;
  ProblemInstance(int m, int k, int n);

  cdouble& h(int m, int k, int n) { return channels[index(m, k, n)]; }
  const cdouble& h(int m, int k, int n) const { return channels[index(m, k, n)]; }
  std::size_t index(int m, int k, int n) const {
    return (static_cast<std::size_t>(m) * K + k) * N + n;
  }

  /// Throws ArgumentError when sizes or positivity invariants are broken.
  void validate() const;
};

}  // namespace edgegnn
