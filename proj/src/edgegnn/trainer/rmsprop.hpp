// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "edgegnn/gnn/params.hpp"

namespace edgegnn {

struct RmsPropConfig {
  double learning_rate = 1e-4;
  double decay = 0.99;
  double epsilon = 1e-8;
  /// Gradients are rescaled to this global L2 norm when larger; <= 0 disables.
  double clip_norm = 10.0;
};

/// Per-parameter running mean of squared gradients, aligned with ModelParams.
template <class T>
using OptState = ModelParams<T>;

struct StepStats {
  double grad_norm = 0.0;
  bool clipped = false;
};

template <class T>
double global_norm(const ModelParams<T>& grads);

/// s <- rho*s + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(s)+eps), after optional clipping of g.
template <class T>
StepStats rmsprop_step(ModelParams<T>& params, const ModelParams<T>& grads, OptState<T>& state,
                       const RmsPropConfig& cfg);

}  // namespace edgegnn
