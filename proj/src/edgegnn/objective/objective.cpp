// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/objective/objective.hpp"

#include <cmath>
#include <numbers>

#include "edgegnn/errors.hpp"

namespace edgegnn {

void require_matching_shape(const ProblemInstance& inst, const Beamformer& V) {
  if (inst.M != V.M || inst.K != V.K || inst.N != V.N ||
      V.weights.size() != static_cast<std::size_t>(V.M) * V.K * V.N) {
    throw DimensionError("beamformer shape does not match the instance");
  }
}

std::vector<double> sinr_per_ue(const ProblemInstance& inst, const Beamformer& V) {
  require_matching_shape(inst, V);
  std::vector<double> sinr(inst.K);
  std::vector<cdouble> received(inst.K);
  for (int k = 0; k < inst.K; ++k) {
    for (int l = 0; l < inst.K; ++l) {
      cdouble acc{0.0, 0.0};
      for (int m = 0; m < inst.M; ++m)
        for (int n = 0; n < inst.N; ++n) acc += std::conj(inst.h(m, k, n)) * V.v(m, l, n);
      received[l] = acc;
    }
    double interference = 0.0;
    for (int l = 0; l < inst.K; ++l)
      if (l != k) interference += std::norm(received[l]);
    sinr[k] = std::norm(received[k]) / (interference + inst.noise_power[k]);
  }
  return sinr;
}

double sum_rate(const ProblemInstance& inst, const Beamformer& V) {
  double rate = 0.0;
  for (double s : sinr_per_ue(inst, V)) rate += std::log2(1.0 + s);
  return rate;
}

std::vector<double> bs_power(const Beamformer& V) {
  std::vector<double> power(V.M, 0.0);
  for (int m = 0; m < V.M; ++m)
    for (int k = 0; k < V.K; ++k)
      for (int n = 0; n < V.N; ++n) power[m] += std::norm(V.v(m, k, n));
  return power;
}

Beamformer project_power(Beamformer V, std::span<const double> budget, PowerNormalization mode) {
  if (budget.size() != static_cast<std::size_t>(V.M)) throw DimensionError("project_power: one budget per BS");
  const std::vector<double> power = bs_power(V);
  for (int m = 0; m < V.M; ++m) {
    if (!(budget[m] > 0.0)) throw ArgumentError("project_power: budgets must be positive");
    const bool scaled = mode == PowerNormalization::Projection ? power[m] > budget[m] : power[m] > 0.0;
    if (!scaled) continue;
    const double f = std::sqrt(budget[m] / power[m]);
    for (int k = 0; k < V.K; ++k)
      for (int n = 0; n < V.N; ++n) V.v(m, k, n) *= f;
  }
  return V;
}

bool is_feasible(const Beamformer& V, std::span<const double> budget, double slack) {
  const std::vector<double> power = bs_power(V);
  for (int m = 0; m < V.M; ++m)
    if (!(power[m] <= budget[m] + slack)) return false;
  return true;
}

double sum_rate_with_gradient(const ProblemInstance& inst, const Beamformer& V, Beamformer& gradient) {
  require_matching_shape(inst, V);
  ad::Tape<double> tape;
  const InstanceConstants<double> c = place_instance(tape, inst);
  ad::Var<double> v = tape.leaf(beamformer_tensor<double>(V));
  ad::Var<double> rate = sum_rate(c, v);
  tape.backward(rate);
  gradient = beamformer_from_tensor(tape.grad(v), inst.M, inst.K, inst.N);
  return rate.value()[0];
}

template <class T>
ad::Tensor<T> channel_tensor(const ProblemInstance& inst) {
  const std::size_t n = inst.N;
  ad::Tensor<T> t(ad::Shape{static_cast<std::size_t>(inst.M) * inst.K, 2 * n});
  for (int m = 0; m < inst.M; ++m)
    for (int k = 0; k < inst.K; ++k) {
      auto row = t.row(static_cast<std::size_t>(m) * inst.K + k);
      for (int a = 0; a < inst.N; ++a) {
        row[a] = static_cast<T>(inst.h(m, k, a).real());
        row[n + a] = static_cast<T>(inst.h(m, k, a).imag());
      }
    }
  return t;
}

template <class T>
ad::Tensor<T> beamformer_tensor(const Beamformer& V) {
  const std::size_t n = V.N;
  ad::Tensor<T> t(ad::Shape{static_cast<std::size_t>(V.M) * V.K, 2 * n});
  for (int m = 0; m < V.M; ++m)
    for (int k = 0; k < V.K; ++k) {
      auto row = t.row(static_cast<std::size_t>(m) * V.K + k);
      for (int a = 0; a < V.N; ++a) {
        row[a] = static_cast<T>(V.v(m, k, a).real());
        row[n + a] = static_cast<T>(V.v(m, k, a).imag());
      }
    }
  return t;
}

template <class T>
Beamformer beamformer_from_tensor(const ad::Tensor<T>& t, int M, int K, int N) {
  if (t.rank() != 2 || t.rows() != static_cast<std::size_t>(M) * K || t.cols() != 2 * static_cast<std::size_t>(N)) {
    throw DimensionError("beamformer tensor must be [M*K, 2N]");
  }
  Beamformer V(M, K, N);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      auto row = t.row(static_cast<std::size_t>(m) * K + k);
      for (int a = 0; a < N; ++a) V.v(m, k, a) = cdouble(row[a], row[N + a]);
    }
  return V;
}

template <class T>
InstanceConstants<T> place_instance(ad::Tape<T>& tape, const ProblemInstance& inst) {
  InstanceConstants<T> c;
  c.M = inst.M;
  c.K = inst.K;
  c.N = inst.N;
  c.channels = tape.constant(channel_tensor<T>(inst));
  ad::Tensor<T> noise(ad::Shape{static_cast<std::size_t>(inst.K), 1});
  for (int k = 0; k < inst.K; ++k) noise[k] = static_cast<T>(inst.noise_power[k]);
  ad::Tensor<T> budget(ad::Shape{static_cast<std::size_t>(inst.M), 1});
  for (int m = 0; m < inst.M; ++m) budget[m] = static_cast<T>(inst.power_budget[m]);
  c.noise = tape.constant(std::move(noise));
  c.budget = tape.constant(std::move(budget));
  return c;
}

template <class T>
ad::Var<T> sinr_per_ue(const InstanceConstants<T>& c, ad::Var<T> V) {
  const std::size_t M = c.M, K = c.K;
  if (V.value().rank() != 2 || V.value().rows() != M * K || V.value().cols() != 2 * static_cast<std::size_t>(c.N))
    throw DimensionError("sinr_per_ue: beamformer tensor must be [M*K, 2N]");

  // Row (k*K + l)*M + m of the pair list holds h_{m,k}^H v_{m,l}.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(K * K * M);
  ad::Groups by_link(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      for (std::size_t m = 0; m < M; ++m) {
        by_link[k * K + l].push_back(pairs.size());
        pairs.emplace_back(m * K + k, m * K + l);
      }
  ad::Var<T> terms = ad::complex_inner_rows(c.channels, V, std::span<const std::pair<std::size_t, std::size_t>>(pairs));
  ad::Var<T> received = ad::segment_sum(terms, by_link);    // [K*K, 2]
  ad::Var<T> gain = ad::row_sum(ad::square(received));      // |.|^2, [K*K, 1]

  std::vector<std::size_t> diagonal(K);
  ad::Groups cross(K);
  for (std::size_t k = 0; k < K; ++k) {
    diagonal[k] = k * K + k;
    for (std::size_t l = 0; l < K; ++l)
      if (l != k) cross[k].push_back(k * K + l);
  }
  ad::Var<T> desired = ad::gather_rows(gain, std::span<const std::size_t>(diagonal));
  ad::Var<T> interference = ad::segment_sum(gain, cross);
  return ad::div(desired, ad::add(interference, c.noise));
}

template <class T>
ad::Var<T> sum_rate(const InstanceConstants<T>& c, ad::Var<T> V) {
  ad::Var<T> sinr = sinr_per_ue(c, V);
  return ad::scale(ad::sum(ad::log(ad::add_scalar(sinr, T{1}))), static_cast<T>(1.0 / std::numbers::ln2));
}

template <class T>
ad::Var<T> bs_power(ad::Var<T> V, int M, int K) {
  ad::Groups blocks(M);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) blocks[m].push_back(static_cast<std::size_t>(m) * K + k);
  return ad::segment_sum(ad::row_sum(ad::square(V)), blocks);
}

template <class T>
ad::Var<T> project_power(ad::Var<T> V, const InstanceConstants<T>& c, PowerNormalization mode) {
  ad::Var<T> factor = ad::power_factor(bs_power(V, c.M, c.K), c.budget, mode);
  std::vector<std::size_t> owner(static_cast<std::size_t>(c.M) * c.K);
  for (std::size_t e = 0; e < owner.size(); ++e) owner[e] = e / c.K;
  return ad::mul_rows(V, ad::gather_rows(factor, std::span<const std::size_t>(owner)));
}

#define EDGEGNN_INSTANTIATE_OBJECTIVE(T)                                                            \
  template ad::Tensor<T> channel_tensor<T>(const ProblemInstance&);                                 \
  template ad::Tensor<T> beamformer_tensor<T>(const Beamformer&);                                   \
  template Beamformer beamformer_from_tensor<T>(const ad::Tensor<T>&, int, int, int);               \
  template InstanceConstants<T> place_instance<T>(ad::Tape<T>&, const ProblemInstance&);            \
  template ad::Var<T> sinr_per_ue<T>(const InstanceConstants<T>&, ad::Var<T>);                      \
  template ad::Var<T> sum_rate<T>(const InstanceConstants<T>&, ad::Var<T>);                         \
  template ad::Var<T> bs_power<T>(ad::Var<T>, int, int);                                            \
  template ad::Var<T> project_power<T>(ad::Var<T>, const InstanceConstants<T>&, PowerNormalization);

EDGEGNN_INSTANTIATE_OBJECTIVE(float)
EDGEGNN_INSTANTIATE_OBJECTIVE(double)

}  // namespace edgegnn
