// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "edgegnn/objective/objective.hpp"

namespace edgegnn {

/// pi1[m] is the new index of BS m, pi2[k] the new index of UE k.
struct PermutationPair {
  std::vector<int> pi1;
  std::vector<int> pi2;

  static PermutationPair identity(int M, int K);
  static PermutationPair random(int M, int K, std::uint64_t seed);
  PermutationPair inverse() const;
  /// Throws ArgumentError unless both maps are bijections.
  void validate() const;
  bool operator==(const PermutationPair&) const = default;
};

ProblemInstance apply_permutation(const ProblemInstance& inst, const PermutationPair& p);
Beamformer apply_permutation(const Beamformer& V, const PermutationPair& p);

/// Row permutations for state tensors: BS rows [M, C], UE rows [K, C] and
/// edge rows [M*K, C] with e = m*K + k.
template <class T>
ad::Tensor<T> permute_bs_rows(const ad::Tensor<T>& x, const PermutationPair& p);
template <class T>
ad::Tensor<T> permute_ue_rows(const ad::Tensor<T>& x, const PermutationPair& p);
template <class T>
ad::Tensor<T> permute_edge_rows(const ad::Tensor<T>& x, const PermutationPair& p);

}  // namespace edgegnn
