// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "edgegnn/numerics/ops.hpp"
#include "edgegnn/objective/objective.hpp"

namespace edgegnn::testing {

inline ad::Tensor<double> random_tensor(const ad::Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                                        double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  ad::Tensor<double> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

/// Builds y = op(inputs) on a fresh tape and reduces it to a scalar with fixed
/// random weights, so every output entry contributes to the gradient.
using OpBuilder = std::function<ad::Var<double>(ad::Tape<double>&, const std::vector<ad::Var<double>>&)>;

struct FdResult {
  double max_rel = 0.0;
  int checked = 0;
};

/// Compares the tape gradient of every input entry with central differences.
inline FdResult fd_check(const OpBuilder& op, const std::vector<ad::Tensor<double>>& inputs, std::uint64_t seed = 7,
                         double step = 1e-6) {
  std::vector<double> weights;
  auto eval = [&](const std::vector<ad::Tensor<double>>& xs, std::vector<ad::Tensor<double>>* grads) {
    ad::Tape<double> tape;
    std::vector<ad::Var<double>> vars;
    for (const auto& x : xs) vars.push_back(tape.leaf(x));
    ad::Var<double> y = op(tape, vars);
    if (weights.empty()) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.5, 1.5);
      weights.resize(y.value().size());
      for (double& w : weights) w = u(rng);
    }
    ad::Tensor<double> wt(y.shape(), weights);
    ad::Var<double> loss = ad::sum(ad::mul(y, tape.constant(wt)));
    if (grads) {
      tape.backward(loss);
      for (const auto& v : vars) grads->push_back(tape.grad(v));
    }
    return loss.value()[0];
  };
  std::vector<ad::Tensor<double>> grads;
  eval(inputs, &grads);
  FdResult r;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    for (std::size_t i = 0; i < inputs[a].size(); ++i) {
      auto plus = inputs;
      auto minus = inputs;
      plus[a][i] += step;
      minus[a][i] -= step;
      const double fd = (eval(plus, nullptr) - eval(minus, nullptr)) / (2 * step);
      const double an = grads[a][i];
      const double rel = std::abs(fd - an) / std::max(1.0, std::max(std::abs(fd), std::abs(an)));
      r.max_rel = std::max(r.max_rel, rel);
      ++r.checked;
    }
  }
  return r;
}

inline Beamformer random_beamformer(int M, int K, int N, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Beamformer V(M, K, N);
  for (auto& w : V.weights) w = {g(rng), g(rng)};
  return V;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace edgegnn::testing
