// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/gnn/params.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "edgegnn/errors.hpp"

namespace edgegnn {

void ModelConfig::validate() const {
  if (L < 1) throw ArgumentError("model: L must be >= 1");
  if (d < 1) throw ArgumentError("model: d must be >= 1");
  if (N < 1) throw ArgumentError("model: N must be >= 1");
  if (mlp_depth < 1) throw ArgumentError("model: mlp_depth must be >= 1");
  if (aggregator != "max") throw ArgumentError("model: only the max aggregator is supported");
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"L", cfg.L}, {"d", cfg.d}, {"N", cfg.N}, {"mlp_depth", cfg.mlp_depth}, {"aggregator", cfg.aggregator}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  try {
    cfg.L = j.value("L", cfg.L);
    cfg.d = j.value("d", cfg.d);
    cfg.N = j.value("N", cfg.N);
    cfg.mlp_depth = j.value("mlp_depth", cfg.mlp_depth);
    cfg.aggregator = j.value("aggregator", cfg.aggregator);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

template <class T>
MlpBlock<ad::Tensor<T>> zero_mlp(std::size_t in, std::size_t width, std::size_t out, int depth) {
  MlpBlock<ad::Tensor<T>> mlp;
  for (int i = 0; i < depth; ++i) {
    const std::size_t fan_in = i == 0 ? in : width;
    const std::size_t fan_out = i + 1 == depth ? out : width;
    mlp.layers.push_back({ad::Tensor<T>(ad::Shape{fan_out, fan_in}), ad::Tensor<T>(ad::Shape{fan_out})});
  }
  return mlp;
}

}  // namespace

template <class T>
ModelParams<T> zero_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.d, n2 = 2 * static_cast<std::size_t>(cfg.N);
  ModelParams<T> p;
  p.pre_bs = zero_mlp<T>(1, d, d, cfg.mlp_depth);
  p.pre_ue = zero_mlp<T>(1, d, d, cfg.mlp_depth);
  p.pre_edge = zero_mlp<T>(n2, d, d, cfg.mlp_depth);
  p.layers.resize(cfg.L);
  for (auto& layer : p.layers) {
    // MLP1/3/5/6 see a node feature next to an edge feature; MLP2/4/7 see their
    // own feature next to the aggregate.
    for (auto& mlp : layer.mlp) mlp = zero_mlp<T>(2 * d, d, d, cfg.mlp_depth);
  }
  p.post_edge = zero_mlp<T>(d, d, n2, cfg.mlp_depth);
  return p;
}

template <class T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams<T> p = zero_params<T>(cfg);
  std::mt19937_64 rng(seed);
  for_each_param(p, [&](const std::string&, ad::Tensor<T>& t) {
    if (t.rank() != 2) return;  // biases stay zero
    const double bound = std::sqrt(6.0 / static_cast<double>(t.shape()[0] + t.shape()[1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : t.data()) x = static_cast<T>(dist(rng));
  });
  return p;
}

template <class T>
std::size_t parameter_count(const ModelParams<T>& params) {
  std::size_t n = 0;
  for_each_param(params, [&](const std::string&, const ad::Tensor<T>& t) { n += t.size(); });
  return n;
}

template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From>& params) {
  auto cast_mlp = [](const MlpBlock<ad::Tensor<From>>& m) {
    MlpBlock<ad::Tensor<To>> out;
    for (const auto& lin : m.layers) out.layers.push_back({lin.weight.template cast<To>(), lin.bias.template cast<To>()});
    return out;
  };
  ModelParams<To> out;
  out.pre_bs = cast_mlp(params.pre_bs);
  out.pre_ue = cast_mlp(params.pre_ue);
  out.pre_edge = cast_mlp(params.pre_edge);
  out.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    for (std::size_t j = 0; j < 7; ++j) out.layers[l].mlp[j] = cast_mlp(params.layers[l].mlp[j]);
  out.post_edge = cast_mlp(params.post_edge);
  return out;
}

template <class T>
TransposedWeights<T> transpose_weights(const ModelParams<T>& params) {
  auto tr = [](const MlpBlock<ad::Tensor<T>>& m) {
    MlpBlock<std::vector<T>> out;
    for (const auto& lin : m.layers) {
      const std::size_t n_out = lin.weight.shape()[0], n_in = lin.weight.shape()[1];
      std::vector<T> wt(n_in * n_out);
      for (std::size_t o = 0; o < n_out; ++o)
        for (std::size_t i = 0; i < n_in; ++i) wt[i * n_out + o] = lin.weight[o * n_in + i];
      out.layers.push_back({std::move(wt), {}});
    }
    return out;
  };
  TransposedWeights<T> out;
  out.pre_bs = tr(params.pre_bs);
  out.pre_ue = tr(params.pre_ue);
  out.pre_edge = tr(params.pre_edge);
  out.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    for (std::size_t j = 0; j < 7; ++j) out.layers[l].mlp[j] = tr(params.layers[l].mlp[j]);
  out.post_edge = tr(params.post_edge);
  return out;
}

template <class T>
BoundParams<T> bind_params(ad::Tape<T>& tape, const ModelParams<T>& params, const TransposedWeights<T>* transposed) {
  auto bind_mlp = [&](const MlpBlock<ad::Tensor<T>>& m) {
    MlpBlock<ad::Var<T>> out;
    for (const auto& lin : m.layers) out.layers.push_back({tape.leaf_ref(lin.weight), tape.leaf_ref(lin.bias)});
    return out;
  };
  BoundParams<T> out;
  out.pre_bs = bind_mlp(params.pre_bs);
  out.pre_ue = bind_mlp(params.pre_ue);
  out.pre_edge = bind_mlp(params.pre_edge);
  out.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    for (std::size_t j = 0; j < 7; ++j) out.layers[l].mlp[j] = bind_mlp(params.layers[l].mlp[j]);
  out.post_edge = bind_mlp(params.post_edge);
  out.transposed = transposed;
  return out;
}

template <class T>
std::vector<T> flatten(const ModelParams<T>& params) {
  std::vector<T> flat;
  for_each_param(params, [&](const std::string&, const ad::Tensor<T>& t) {
    flat.insert(flat.end(), t.data().begin(), t.data().end());
  });
  return flat;
}

template <class T>
void unflatten(std::span<const T> flat, ModelParams<T>& params) {
  std::size_t offset = 0;
  for_each_param(params, [&](const std::string&, ad::Tensor<T>& t) {
    if (offset + t.size() > flat.size()) throw DimensionError("unflatten: vector too short");
    std::copy_n(flat.begin() + offset, t.size(), t.data().begin());
    offset += t.size();
  });
  if (offset != flat.size()) throw DimensionError("unflatten: vector too long");
}

template <class T>
std::uint64_t params_fingerprint(const ModelParams<T>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_param(params, [&](const std::string&, const ad::Tensor<T>& t) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.data().data());
    for (std::size_t i = 0; i < t.size() * sizeof(T); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  });
  return h;
}

#define EDGEGNN_INSTANTIATE_PARAMS(T)                                                  \
  template ModelParams<T> zero_params<T>(const ModelConfig&);                          \
  template ModelParams<T> init_params<T>(const ModelConfig&, std::uint64_t);           \
  template std::size_t parameter_count<T>(const ModelParams<T>&);                      \
  template TransposedWeights<T> transpose_weights<T>(const ModelParams<T>&);           \
  template BoundParams<T> bind_params<T>(ad::Tape<T>&, const ModelParams<T>&,          \
                                         const TransposedWeights<T>*);                 \
  template std::vector<T> flatten<T>(const ModelParams<T>&);                           \
  template void unflatten<T>(std::span<const T>, ModelParams<T>&);                     \
  template std::uint64_t params_fingerprint<T>(const ModelParams<T>&);

EDGEGNN_INSTANTIATE_PARAMS(float)
EDGEGNN_INSTANTIATE_PARAMS(double)

template ModelParams<float> cast_params<float, double>(const ModelParams<double>&);
template ModelParams<double> cast_params<double, float>(const ModelParams<float>&);
template ModelParams<float> cast_params<float, float>(const ModelParams<float>&);
template ModelParams<double> cast_params<double, double>(const ModelParams<double>&);

}  // namespace edgegnn
