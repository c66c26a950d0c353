// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/gnn/topology.hpp"

#include <algorithm>
#include <string>

#include "edgegnn/errors.hpp"

namespace edgegnn {

Topology Topology::full(int M, int K) {
  if (M < 1 || K < 1) throw ArgumentError("topology needs M >= 1 and K >= 1");
  Topology t;
  t.M = M;
  t.K = K;
  t.nbr_bs.assign(M, {});
  t.nbr_ue.assign(K, {});
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      t.nbr_bs[m].push_back(k);
      t.nbr_ue[k].push_back(m);
    }
  return t;
}

Topology Topology::from_edges(int M, int K, const std::vector<std::pair<int, int>>& edges) {
  if (M < 1 || K < 1) throw ArgumentError("topology needs M >= 1 and K >= 1");
  Topology t;
  t.M = M;
  t.K = K;
  t.nbr_bs.assign(M, {});
  t.nbr_ue.assign(K, {});
  for (auto [m, k] : edges) {
    if (m < 0 || m >= M || k < 0 || k >= K) throw ArgumentError("topology edge out of range");
    t.nbr_bs[m].push_back(k);
    t.nbr_ue[k].push_back(m);
  }
  for (auto& v : t.nbr_bs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : t.nbr_ue) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return t;
}

bool Topology::connected(int m, int k) const {
  const auto& v = nbr_bs.at(m);
  return std::find(v.begin(), v.end(), k) != v.end();
}

bool Topology::is_full() const {
  for (const auto& v : nbr_bs)
    if (static_cast<int>(v.size()) != K) return false;
  return true;
}

void Topology::validate() const {
  if (M < 1 || K < 1) throw ArgumentError("topology needs M >= 1 and K >= 1");
  if (static_cast<int>(nbr_bs.size()) != M || static_cast<int>(nbr_ue.size()) != K)
    throw ArgumentError("topology neighbor lists do not match M and K");
  for (int m = 0; m < M; ++m)
    for (int k : nbr_bs[m]) {
      if (k < 0 || k >= K) throw ArgumentError("topology: UE index " + std::to_string(k) + " out of range");
      const auto& back = nbr_ue[k];
      if (std::find(back.begin(), back.end(), m) == back.end())
        throw ArgumentError("topology is not symmetric at (" + std::to_string(m) + ", " + std::to_string(k) + ")");
    }
  for (int k = 0; k < K; ++k)
    for (int m : nbr_ue[k]) {
      if (m < 0 || m >= M) throw ArgumentError("topology: BS index " + std::to_string(m) + " out of range");
      if (!connected(m, k))
        throw ArgumentError("topology is not symmetric at (" + std::to_string(m) + ", " + std::to_string(k) + ")");
    }
}

EdgeGroups EdgeGroups::build(const Topology& topo) {
  topo.validate();
  const std::size_t M = topo.M, K = topo.K, E = M * K;
  EdgeGroups g;
  g.by_bs.assign(M, {});
  g.by_ue.assign(K, {});
  g.edge_nbrs.assign(E, {});
  g.bs_of.resize(E);
  g.ue_of.resize(E);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t e = m * K + k;
      g.bs_of[e] = m;
      g.ue_of[e] = k;
    }
  for (std::size_t m = 0; m < M; ++m)
    for (int k : topo.nbr_bs[m]) g.by_bs[m].push_back(m * K + k);
  for (std::size_t k = 0; k < K; ++k)
    for (int m : topo.nbr_ue[k]) g.by_ue[k].push_back(m * K + k);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t k = 0; k < K; ++k) {
      auto& nb = g.edge_nbrs[m * K + k];
      for (int k1 : topo.nbr_bs[m])
        if (static_cast<std::size_t>(k1) != k) nb.push_back(m * K + k1);
      for (int m1 : topo.nbr_ue[k])
        if (static_cast<std::size_t>(m1) != m) nb.push_back(E + m1 * K + k);
    }
  return g;
}

}  // namespace edgegnn
