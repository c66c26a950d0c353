// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "edgegnn/baselines/baselines.hpp"

namespace edgegnn {

Beamformer matched_filter_init(const ProblemInstance& inst) {
  Beamformer V(inst.M, inst.K, inst.N);
  for (int m = 0; m < inst.M; ++m)
    for (int k = 0; k < inst.K; ++k) {
      double norm2 = 0.0;
      for (int n = 0; n < inst.N; ++n) norm2 += std::norm(inst.h(m, k, n));
      if (norm2 <= 0.0) continue;
      const double f = std::sqrt(inst.power_budget[m] / (inst.K * norm2));
      for (int n = 0; n < inst.N; ++n) V.v(m, k, n) = f * inst.h(m, k, n);
    }
  return V;
}

}  // namespace edgegnn
