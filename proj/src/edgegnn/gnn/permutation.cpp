// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/gnn/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "edgegnn/errors.hpp"

namespace edgegnn {
namespace {

void check_bijection(const std::vector<int>& pi, const char* what) {
  std::vector<char> seen(pi.size(), 0);
  for (int v : pi) {
    if (v < 0 || static_cast<std::size_t>(v) >= pi.size() || seen[v])
      throw ArgumentError(std::string(what) + " is not a permutation");
    seen[v] = 1;
  }
}

std::vector<int> invert(const std::vector<int>& pi) {
  std::vector<int> inv(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) inv[pi[i]] = static_cast<int>(i);
  return inv;
}

void check_sizes(const PermutationPair& p, int M, int K) {
  p.validate();
  if (static_cast<int>(p.pi1.size()) != M || static_cast<int>(p.pi2.size()) != K)
    throw DimensionError("permutation sizes do not match (M, K)");
}

template <class T>
ad::Tensor<T> permute_rows(const ad::Tensor<T>& x, const std::vector<std::size_t>& dest) {
  if (x.rank() != 2 || x.rows() != dest.size()) throw DimensionError("permutation size does not match tensor rows");
  ad::Tensor<T> out(x.shape());
  for (std::size_t r = 0; r < dest.size(); ++r) std::copy(x.row(r).begin(), x.row(r).end(), out.row(dest[r]).begin());
  return out;
}

}  // namespace

PermutationPair PermutationPair::identity(int M, int K) {
  PermutationPair p;
  p.pi1.resize(M);
  p.pi2.resize(K);
  std::iota(p.pi1.begin(), p.pi1.end(), 0);
  std::iota(p.pi2.begin(), p.pi2.end(), 0);
  return p;
}

PermutationPair PermutationPair::random(int M, int K, std::uint64_t seed) {
  PermutationPair p = identity(M, K);
  std::mt19937_64 rng(seed);
  std::shuffle(p.pi1.begin(), p.pi1.end(), rng);
  std::shuffle(p.pi2.begin(), p.pi2.end(), rng);
  return p;
}

PermutationPair PermutationPair::inverse() const {
  validate();
  return {invert(pi1), invert(pi2)};
}

void PermutationPair::validate() const {
  check_bijection(pi1, "pi1");
  check_bijection(pi2, "pi2");
}

ProblemInstance apply_permutation(const ProblemInstance& inst, const PermutationPair& p) {
  check_sizes(p, inst.M, inst.K);
  ProblemInstance out = inst;
  for (int m = 0; m < inst.M; ++m) {
    out.power_budget[p.pi1[m]] = inst.power_budget[m];
    for (int k = 0; k < inst.K; ++k)
      for (int n = 0; n < inst.N; ++n) out.h(p.pi1[m], p.pi2[k], n) = inst.h(m, k, n);
  }
  for (int k = 0; k < inst.K; ++k) out.noise_power[p.pi2[k]] = inst.noise_power[k];
  return out;
}

Beamformer apply_permutation(const Beamformer& V, const PermutationPair& p) {
  check_sizes(p, V.M, V.K);
  Beamformer out(V.M, V.K, V.N);
  for (int m = 0; m < V.M; ++m)
    for (int k = 0; k < V.K; ++k)
      for (int n = 0; n < V.N; ++n) out.v(p.pi1[m], p.pi2[k], n) = V.v(m, k, n);
  return out;
}

template <class T>
ad::Tensor<T> permute_bs_rows(const ad::Tensor<T>& x, const PermutationPair& p) {
  p.validate();
  return permute_rows(x, std::vector<std::size_t>(p.pi1.begin(), p.pi1.end()));
}

template <class T>
ad::Tensor<T> permute_ue_rows(const ad::Tensor<T>& x, const PermutationPair& p) {
  p.validate();
  return permute_rows(x, std::vector<std::size_t>(p.pi2.begin(), p.pi2.end()));
}

template <class T>
ad::Tensor<T> permute_edge_rows(const ad::Tensor<T>& x, const PermutationPair& p) {
  p.validate();
  const std::size_t M = p.pi1.size(), K = p.pi2.size();
  std::vector<std::size_t> dest(M * K);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) dest[m * K + k] = static_cast<std::size_t>(p.pi1[m]) * K + p.pi2[k];
  return permute_rows(x, dest);
}

template ad::Tensor<float> permute_bs_rows<float>(const ad::Tensor<float>&, const PermutationPair&);
template ad::Tensor<double> permute_bs_rows<double>(const ad::Tensor<double>&, const PermutationPair&);
template ad::Tensor<float> permute_ue_rows<float>(const ad::Tensor<float>&, const PermutationPair&);
template ad::Tensor<double> permute_ue_rows<double>(const ad::Tensor<double>&, const PermutationPair&);
template ad::Tensor<float> permute_edge_rows<float>(const ad::Tensor<float>&, const PermutationPair&);
template ad::Tensor<double> permute_edge_rows<double>(const ad::Tensor<double>&, const PermutationPair&);

}  // namespace edgegnn
