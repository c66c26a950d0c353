// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/trainer/rmsprop.hpp"

#include <cmath>
#include <vector>

#include "edgegnn/errors.hpp"

namespace edgegnn {
namespace {

template <class T>
std::vector<ad::Tensor<T>*> tensors(ModelParams<T>& p) {
  std::vector<ad::Tensor<T>*> out;
  for_each_param(p, [&](const std::string&, ad::Tensor<T>& t) { out.push_back(&t); });
  return out;
}

template <class T>
std::vector<const ad::Tensor<T>*> tensors(const ModelParams<T>& p) {
  std::vector<const ad::Tensor<T>*> out;
  for_each_param(p, [&](const std::string&, const ad::Tensor<T>& t) { out.push_back(&t); });
  return out;
}

}  // namespace

template <class T>
double global_norm(const ModelParams<T>& grads) {
  double sq = 0.0;
  for (const auto* t : tensors(grads))
    for (T g : t->data()) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

template <class T>
StepStats rmsprop_step(ModelParams<T>& params, const ModelParams<T>& grads, OptState<T>& state,
                       const RmsPropConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0)) throw ArgumentError("rmsprop: learning rate must be >= 0");
  if (!(cfg.decay >= 0.0 && cfg.decay < 1.0)) throw ArgumentError("rmsprop: decay must lie in [0, 1)");
  auto p = tensors(params);
  auto g = tensors(grads);
  auto s = tensors(state);
  if (p.size() != g.size() || p.size() != s.size()) throw DimensionError("rmsprop: parameter sets do not align");

  StepStats stats;
  stats.grad_norm = global_norm(grads);
  double factor = 1.0;
  if (cfg.clip_norm > 0.0 && stats.grad_norm > cfg.clip_norm) {
    factor = cfg.clip_norm / stats.grad_norm;
    stats.clipped = true;
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t]->shape() != g[t]->shape() || p[t]->shape() != s[t]->shape())
      throw DimensionError("rmsprop: tensor shapes do not align");
    for (std::size_t i = 0; i < p[t]->size(); ++i) {
      const double gi = factor * static_cast<double>((*g[t])[i]);
      const double si = cfg.decay * static_cast<double>((*s[t])[i]) + (1.0 - cfg.decay) * gi * gi;
      (*s[t])[i] = static_cast<T>(si);
      (*p[t])[i] = static_cast<T>(static_cast<double>((*p[t])[i]) - cfg.learning_rate * gi / (std::sqrt(si) + cfg.epsilon));
    }
  }
  return stats;
}

template double global_norm<float>(const ModelParams<float>&);
template double global_norm<double>(const ModelParams<double>&);
template StepStats rmsprop_step<float>(ModelParams<float>&, const ModelParams<float>&, OptState<float>&,
                                       const RmsPropConfig&);
template StepStats rmsprop_step<double>(ModelParams<double>&, const ModelParams<double>&, OptState<double>&,
                                        const RmsPropConfig&);

}  // namespace edgegnn
