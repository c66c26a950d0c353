// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "edgegnn/gnn/params.hpp"
#include "edgegnn/gnn/topology.hpp"
#include "edgegnn/objective/objective.hpp"

namespace edgegnn {

/// Deliberate model corruptions used by the verification harness.
enum class Fault {
  None,
  TieMlp56,       ///< MLP_6 reuses MLP_5's weights
  UeIndexedMlp1,  ///< MLP_1 output shifted by 0.01 * (UE index)
};

Fault fault_from_string(const std::string& name);
const char* to_string(Fault fault);

struct ForwardOptions {
  Fault fault = Fault::None;
  PowerNormalization normalization = PowerNormalization::Projection;
};

/// Layer state: F_BS [M, d], F_UE [K, d], E [M*K, d] with row e = m*K + k.
template <class T>
struct GraphState {
  ad::Var<T> bs;
  ad::Var<T> ue;
  ad::Var<T> edge;
};

template <class T>
ad::Var<T> apply_mlp(const MlpBlock<ad::Var<T>>& mlp, ad::Var<T> x, bool relu_last = true,
                     const MlpBlock<std::vector<T>>* transposed = nullptr);

template <class T>
GraphState<T> preprocess(const InstanceConstants<T>& inst, const BoundParams<T>& params);

// One updating layer, l in 1..L. All three read only the layer l-1 state.
template <class T>
ad::Var<T> bs_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                     const ForwardOptions& options = {});
template <class T>
ad::Var<T> ue_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                     const ForwardOptions& options = {});
template <class T>
ad::Var<T> edge_update(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                       const ForwardOptions& options = {});
template <class T>
GraphState<T> update_layer(const GraphState<T>& s, const EdgeGroups& g, const BoundParams<T>& params, int l,
                           const ForwardOptions& options = {});

/// Edge-wise output MLP to [M*K, 2N], non-edges zeroed, then per-BS power scaling.
template <class T>
ad::Var<T> postprocess(const GraphState<T>& s, const InstanceConstants<T>& inst, const Topology& topo,
                       const BoundParams<T>& params, const ForwardOptions& options = {});

template <class T>
ad::Var<T> forward(const InstanceConstants<T>& inst, const Topology& topo, const BoundParams<T>& params,
                   const ForwardOptions& options = {});

/// Inference without gradient recording. Uses the full topology when none is given.
template <class T>
Beamformer infer(const ProblemInstance& inst, const ModelParams<T>& params, const ForwardOptions& options = {},
                 const Topology* topo = nullptr);

/// Parameters with their weight transposes prepared once, for repeated
/// inference. Produces the same outputs as infer().
template <class T>
class InferenceModel {
 public:
  explicit InferenceModel(ModelParams<T> params);

  Beamformer infer(const ProblemInstance& inst, const ForwardOptions& options = {},
                   const Topology* topo = nullptr) const;
  const ModelParams<T>& params() const noexcept { return params_; }

 private:
  ModelParams<T> params_;
  TransposedWeights<T> transposed_;
};

}  // namespace edgegnn
