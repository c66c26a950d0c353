// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/gnn/model.hpp"

#include <array>

#include "edgegnn/errors.hpp"

namespace edgegnn {

Fault fault_from_string(const std::string& name) {
  if (name.empty() || name == "none") return Fault::None;
  if (name == "tie-mlp56") return Fault::TieMlp56;
  if (name == "ue-indexed-mlp1") return Fault::UeIndexedMlp1;
  throw ArgumentError("unknown fault '" + name + "' (expected none, tie-mlp56 or ue-indexed-mlp1)");
}

const char* to_string(Fault fault) {
  switch (fault) {
    case Fault::None: return "none";
    case Fault::TieMlp56: return "tie-mlp56";
    case Fault::UeIndexedMlp1: return "ue-indexed-mlp1";
  }
  return "?";
}

namespace {

template <class T>
ad::Var<T> cat2(ad::Var<T> a, ad::Var<T> b) {
  const std::array<ad::Var<T>, 2> xs{a, b};
  return ad::concat<T>(std::span<const ad::Var<T>>(xs));
}

template <class T>
const LayerBlock<ad::Var<T>>& layer_at(const BoundParams<T>& params, int l) {
  if (l < 1 || static_cast<std::size_t>(l) > params.layers.size())
    throw ArgumentError("layer index " + std::to_string(l) + " out of range");
  return params.layers[l - 1];
}

template <class T>
ad::Var<T> gather(ad::Var<T> x, const std::vector<std::size_t>& index) {
  return ad::gather_rows(x, std::span<const std::size_t>(index));
}

// Applies the MLP picked by `select` from both the bound parameters and, when
// present, their transposes.
template <class T, class Select>
ad::Var<T> run(const BoundParams<T>& params, Select&& select, ad::Var<T> x, bool relu_last = true) {
  const ParamSet<ad::Var<T>>& bound = params;
  return apply_mlp(select(bound), x, relu_last, params.transposed ? &select(*params.transposed) : nullptr);
}

}  // namespace

template <class T>
ad::Var<T> apply_mlp(const MlpBlock<ad::Var<T>>& mlp, ad::Var<T> x, bool relu_last,
                     const MlpBlock<std::vector<T>>* transposed) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const std::span<const T> wt = transposed ? std::span<const T>(transposed->layers[i].weight) : std::span<const T>();
    x = ad::linear(x, mlp.layers[i].weight, mlp.layers[i].bias, wt);
    if (i + 1 < mlp.layers.size() || relu_last) x = ad::relu(x);
  }
  return x;
}

template <class T>
GraphState<T> preprocess(const InstanceConstants<T>& inst, const BoundParams<T>& params) {
  const std::size_t n_in = params.pre_edge.layers.front().weight.value().shape()[1];
  if (n_in != 2 * static_cast<std::size_t>(inst.N))
    throw DimensionError("model expects N = " + std::to_string(n_in / 2) + " antennas, instance has " +
                         std::to_string(inst.N));
  GraphState<T> s;
  s.bs = run(params, [](const auto& p) -> const auto& { return p.pre_bs; }, inst.budget);
  s.ue = run(params, [](const auto& p) -> const auto& { return p.pre_ue; }, inst.noise);
  s.edge = run(params, [](const auto& p) -> const auto& { return p.pre_edge; }, inst.channels);
  return s;
}

template <class T>
ad::Var<T> bs_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                     const ForwardOptions& options) {
  layer_at(params, l);
  auto mlp = [l](std::size_t j) { return [l, j](const auto& p) -> const auto& { return p.layers[l - 1].mlp[j]; }; };
  ad::Var<T> msg = run(params, mlp(0), cat2(gather(s.ue, g.ue_of), s.edge));
  if (options.fault == Fault::UeIndexedMlp1) {
    ad::Tensor<T> offset(msg.value().shape());
    const std::size_t d = offset.cols();
    for (std::size_t e = 0; e < offset.rows(); ++e)
      for (std::size_t j = 0; j < d; ++j) offset.at(e, j) = static_cast<T>(0.01 * static_cast<double>(g.ue_of[e]));
    msg = ad::add(msg, msg.tape->constant(std::move(offset)));
  }
  return run(params, mlp(1), cat2(s.bs, ad::segment_max(msg, g.by_bs)));
}

template <class T>
ad::Var<T> ue_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                     const ForwardOptions&) {
  layer_at(params, l);
  auto mlp = [l](std::size_t j) { return [l, j](const auto& p) -> const auto& { return p.layers[l - 1].mlp[j]; }; };
  ad::Var<T> msg = run(params, mlp(2), cat2(gather(s.bs, g.bs_of), s.edge));
  return run(params, mlp(3), cat2(s.ue, ad::segment_max(msg, g.by_ue)));
}

template <class T>
ad::Var<T> edge_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                       const ForwardOptions& options) {
  layer_at(params, l);
  auto mlp = [l](std::size_t j) { return [l, j](const auto& p) -> const auto& { return p.layers[l - 1].mlp[j]; }; };
  const std::size_t mlp6 = options.fault == Fault::TieMlp56 ? 4 : 5;
  // Each edge's transformed message is computed once and shared by all
  // neighbors that aggregate it.
  ad::Var<T> via_bs = run(params, mlp(4), cat2(s.edge, gather(s.bs, g.bs_of)));
  ad::Var<T> via_ue = run(params, mlp(mlp6), cat2(s.edge, gather(s.ue, g.ue_of)));
  const std::array<ad::Var<T>, 2> both{via_bs, via_ue};
  ad::Var<T> agg = ad::segment_max(ad::vstack<T>(std::span<const ad::Var<T>>(both)), g.edge_nbrs);
  return run(params, mlp(6), cat2(s.edge, agg));
}

template <class T>
GraphState<T> update_layer(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                           const ForwardOptions& options) {
  GraphState<T> next;
  next.bs = bs_update(s, g, params, l, options);
  next.ue = ue_update(s, g, params, l, options);
  next.edge = edge_update(s, g, params, l, options);
  return next;
}

template <class T>
ad::Var<T> postprocess(const GraphState<T>& s, const InstanceConstants<T>& inst, const Topology& topo,
                       const BoundParams<T>& params, const ForwardOptions& options) {
  ad::Var<T> V = run(params, [](const auto& p) -> const auto& { return p.post_edge; }, s.edge, false);
  if (!topo.is_full()) {
    ad::Tensor<T> mask(ad::Shape{static_cast<std::size_t>(topo.M) * topo.K, 1});
    for (int m = 0; m < topo.M; ++m)
      for (int k = 0; k < topo.K; ++k) mask[static_cast<std::size_t>(m) * topo.K + k] = topo.connected(m, k) ? T{1} : T{0};
    V = ad::mul_rows(V, V.tape->constant(std::move(mask)));
  }
  return project_power(V, inst, options.normalization);
}

template <class T>
ad::Var<T> forward(const InstanceConstants<T>& inst, const Topology& topo, const BoundParams<T>& params,
                   const ForwardOptions& options) {
  if (topo.M != inst.M || topo.K != inst.K) throw DimensionError("topology size does not match the instance");
  const EdgeGroups groups = EdgeGroups::build(topo);
  GraphState<T> s = preprocess(inst, params);
  for (int l = 1; l <= static_cast<int>(params.layers.size()); ++l) s = update_layer(s, groups, params, l, options);
  return postprocess(s, inst, topo, params, options);
}

namespace {

template <class T>
Beamformer infer_with(const ProblemInstance& inst, const ModelParams<T>& params, const TransposedWeights<T>* transposed,
                      const ForwardOptions& options, const Topology* topo) {
  ad::Tape<T> tape;
  tape.set_grad_enabled(false);
  const InstanceConstants<T> c = place_instance(tape, inst);
  const BoundParams<T> bound = bind_params(tape, params, transposed);
  const Topology full = topo ? Topology{} : Topology::full(inst.M, inst.K);
  ad::Var<T> V = forward(c, topo ? *topo : full, bound, options);
  return beamformer_from_tensor(V.value(), inst.M, inst.K, inst.N);
}

}  // namespace

template <class T>
Beamformer infer(const ProblemInstance& inst, const ModelParams<T>& params, const ForwardOptions& options,
                 const Topology* topo) {
  return infer_with<T>(inst, params, nullptr, options, topo);
}

template <class T>
InferenceModel<T>::InferenceModel(ModelParams<T> params)
    : params_(std::move(params)), transposed_(transpose_weights(params_)) {}

template <class T>
Beamformer InferenceModel<T>::infer(const ProblemInstance& inst, const ForwardOptions& options,
                                    const Topology* topo) const {
  return infer_with<T>(inst, params_, &transposed_, options, topo);
}

#define EDGEGNN_INSTANTIATE_MODEL(T)                                                                              \
  template ad::Var<T> apply_mlp<T>(const MlpBlock<ad::Var<T>>&, ad::Var<T>, bool,                                 \
                                   const MlpBlock<std::vector<T>>*);                                              \
  template class InferenceModel<T>;                                                                               \
  template GraphState<T> preprocess<T>(const InstanceConstants<T>&, const BoundParams<T>&);                       \
  template ad::Var<T> bs_update<T>(const GraphState<T>&, const EdgeGroups&, const BoundParams<T>&, int,           \
                                   const ForwardOptions&);                                                        \
  template ad::Var<T> ue_update<T>(const GraphState<T>&, const EdgeGroups&, const BoundParams<T>&, int,           \
                                   const ForwardOptions&);                                                        \
  template ad::Var<T> edge_update<T>(const GraphState<T>&, const EdgeGroups&, const BoundParams<T>&, int,         \
                                     const ForwardOptions&);                                                      \
  template GraphState<T> update_layer<T>(const GraphState<T>&, const EdgeGroups&, const BoundParams<T>&, int,     \
                                         const ForwardOptions&);                                                  \
  template ad::Var<T> postprocess<T>(const GraphState<T>&, const InstanceConstants<T>&, const Topology&,          \
                                     const BoundParams<T>&, const ForwardOptions&);                               \
  template ad::Var<T> forward<T>(const InstanceConstants<T>&, const Topology&, const BoundParams<T>&,             \
                                 const ForwardOptions&);                                                          \
  template Beamformer infer<T>(const ProblemInstance&, const ModelParams<T>&, const ForwardOptions&,              \
                               const Topology*);

EDGEGNN_INSTANTIATE_MODEL(float)
EDGEGNN_INSTANTIATE_MODEL(double)

}  // namespace edgegnn
