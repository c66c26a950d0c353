// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/numerics/tape.hpp"

namespace edgegnn {

struct ModelConfig {
  int L = 2;          ///< updating layers
  int d = 64;         ///< representation width
  int N = 2;          ///< antennas per BS
  int mlp_depth = 3;  ///< linear layers per MLP
  std::string aggregator = "max";

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

template <class Leaf>
struct LinearBlock {
  Leaf weight;  ///< [out, in]
  Leaf bias;    ///< [out]
};

template <class Leaf>
struct MlpBlock {
  std::vector<LinearBlock<Leaf>> layers;
};

/// MLP_1 .. MLP_7 of one updating layer (index 0 holds MLP_1).
template <class Leaf>
struct LayerBlock {
  std::array<MlpBlock<Leaf>, 7> mlp;
};

template <class Leaf>
struct ParamSet {
  MlpBlock<Leaf> pre_bs;
  MlpBlock<Leaf> pre_ue;
  MlpBlock<Leaf> pre_edge;
  std::vector<LayerBlock<Leaf>> layers;
  MlpBlock<Leaf> post_edge;
};

template <class T>
using ModelParams = ParamSet<ad::Tensor<T>>;
/// W^T for every weight ([in, out] row-major); bias slots stay empty.
template <class T>
using TransposedWeights = ParamSet<std::vector<T>>;

/// Parameters bound to a tape, optionally with precomputed transposes that
/// must outlive the tape.
template <class T>
struct BoundParams : ParamSet<ad::Var<T>> {
  const TransposedWeights<T>* transposed = nullptr;
};

namespace detail {
template <class Block, class F>
void visit_mlp(const std::string& prefix, Block& mlp, F& f) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    f(prefix + "." + std::to_string(i) + ".weight", mlp.layers[i].weight);
    f(prefix + "." + std::to_string(i) + ".bias", mlp.layers[i].bias);
  }
}
}  // namespace detail

/// Calls f(name, leaf) for every tensor in canonical order: pre_bs, pre_ue,
/// pre_edge, layer1.mlp1 .. layerL.mlp7, post_edge. Names look like
/// "layer1.mlp5.2.weight".
template <class PS, class F>
void for_each_param(PS& params, F&& f) {
  detail::visit_mlp("pre_bs", params.pre_bs, f);
  detail::visit_mlp("pre_ue", params.pre_ue, f);
  detail::visit_mlp("pre_edge", params.pre_edge, f);
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    for (std::size_t j = 0; j < 7; ++j)
      detail::visit_mlp("layer" + std::to_string(l + 1) + ".mlp" + std::to_string(j + 1), params.layers[l].mlp[j], f);
  detail::visit_mlp("post_edge", params.post_edge, f);
}

/// Zero-filled parameters with the shapes implied by cfg.
template <class T>
ModelParams<T> zero_params(const ModelConfig& cfg);

/// Weights uniform on +-sqrt(6 / (fan_in + fan_out)), biases zero.
template <class T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

template <class T>
std::size_t parameter_count(const ModelParams<T>& params);

template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From>& params);

template <class T>
TransposedWeights<T> transpose_weights(const ModelParams<T>& params);

/// Binds every tensor to the tape as a differentiable leaf by reference.
template <class T>
BoundParams<T> bind_params(ad::Tape<T>& tape, const ModelParams<T>& params,
                           const TransposedWeights<T>* transposed = nullptr);

/// Flat copy of all parameters in canonical order, and its inverse.
template <class T>
std::vector<T> flatten(const ModelParams<T>& params);
template <class T>
void unflatten(std::span<const T> flat, ModelParams<T>& params);

/// FNV-1a over the raw bytes of every tensor in canonical order.
template <class T>
std::uint64_t params_fingerprint(const ModelParams<T>& params);

}  // namespace edgegnn
