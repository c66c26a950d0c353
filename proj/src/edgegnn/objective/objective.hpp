// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "edgegnn/numerics/ops.hpp"
#include "edgegnn/scenario/instance.hpp"

namespace edgegnn {

using ad::PowerNormalization;

/// Beamformers v_{m,k} in C^N, row-major (m, k, antenna).
struct Beamformer {
  int M = 0;
  int K = 0;
  int N = 0;
  std::vector<cdouble> weights;

  Beamformer() = default;
  Beamformer(int m, int k, int n) : M(m), K(k), N(n), weights(static_cast<std::size_t>(m) * k * n) {}

  cdouble& v(int m, int k, int n) { return weights[(static_cast<std::size_t>(m) * K + k) * N + n]; }
  const cdouble& v(int m, int k, int n) const { return weights[(static_cast<std::size_t>(m) * K + k) * N + n]; }
  bool operator==(const Beamformer&) const = default;
};

// Plain double-precision evaluation.

std::vector<double> sinr_per_ue(const ProblemInstance& inst, const Beamformer& V);
/// Sum of log2(1 + SINR_k), in bits/s/Hz.
double sum_rate(const ProblemInstance& inst, const Beamformer& V);
/// Per-BS transmit power sum_k ||v_{m,k}||^2.
std::vector<double> bs_power(const Beamformer& V);
/// Per-BS block scaling onto the power budget (see PowerNormalization).
Beamformer project_power(Beamformer V, std::span<const double> budget,
                         PowerNormalization mode = PowerNormalization::Projection);
/// True when every per-BS power is at most P_m + slack.
bool is_feasible(const Beamformer& V, std::span<const double> budget, double slack = 1e-6);

/// Sum rate and its gradient with respect to V. The gradient is returned as
/// d/d(Re v) + i d/d(Im v), evaluated on a double-precision tape.
double sum_rate_with_gradient(const ProblemInstance& inst, const Beamformer& V, Beamformer& gradient);

void require_matching_shape(const ProblemInstance& inst, const Beamformer& V);

// Tape-level (differentiable) evaluation. Edge rows are indexed e = m*K + k and
// hold [re_0..re_{N-1}, im_0..im_{N-1}].

template <class T>
struct InstanceConstants {
  int M = 0;
  int K = 0;
  int N = 0;
  ad::Var<T> channels;  ///< [MK, 2N]
  ad::Var<T> noise;     ///< [K, 1]
  ad::Var<T> budget;    ///< [M, 1]
};

template <class T>
ad::Tensor<T> channel_tensor(const ProblemInstance& inst);
template <class T>
ad::Tensor<T> beamformer_tensor(const Beamformer& V);
template <class T>
Beamformer beamformer_from_tensor(const ad::Tensor<T>& t, int M, int K, int N);

template <class T>
InstanceConstants<T> place_instance(ad::Tape<T>& tape, const ProblemInstance& inst);

/// SINR per UE, [K, 1].
template <class T>
ad::Var<T> sinr_per_ue(const InstanceConstants<T>& inst, ad::Var<T> V);
/// Scalar sum rate in bits.
template <class T>
ad::Var<T> sum_rate(const InstanceConstants<T>& inst, ad::Var<T> V);
/// Per-BS power, [M, 1].
template <class T>
ad::Var<T> bs_power(ad::Var<T> V, int M, int K);
template <class T>
ad::Var<T> project_power(ad::Var<T> V, const InstanceConstants<T>& inst,
                         PowerNormalization mode = PowerNormalization::Projection);

}  // namespace edgegnn
