// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "edgegnn/numerics/ops.hpp"

namespace edgegnn {

/// Bipartite BS-UE connectivity. nbr_bs[m] lists the UEs served by BS m and
/// nbr_ue[k] the BSs serving UE k. from_edges() and full() keep both
/// lists ascending; other orders are accepted.
struct Topology {
  int M = 0;
  int K = 0;
  std::vector<std::vector<int>> nbr_bs;
  std::vector<std::vector<int>> nbr_ue;

  static Topology full(int M, int K);
  /// Builds both neighbor lists from (m, k) pairs.
  static Topology from_edges(int M, int K, const std::vector<std::pair<int, int>>& edges);

  bool connected(int m, int k) const;
  bool is_full() const;
  /// Throws ArgumentError on out-of-range or asymmetric neighbor lists.
  void validate() const;
};

/// Row groups over edge rows e = m*K + k derived from a topology.
struct EdgeGroups {
  ad::Groups by_bs;        ///< m -> edges (m, k), k in nbr_bs[m]
  ad::Groups by_ue;        ///< k -> edges (m, k), m in nbr_ue[k]
  ad::Groups edge_nbrs;    ///< e -> rows of [Y5; Y6]: (m, k1 != k) from Y5, (m1 != m, k) from Y6
  std::vector<std::size_t> bs_of;  ///< e -> m
  std::vector<std::size_t> ue_of;  ///< e -> k

  static EdgeGroups build(const Topology& topo);
};

}  // namespace edgegnn
