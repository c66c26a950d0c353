// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/numerics/tape.hpp"

#include "edgegnn/errors.hpp"

namespace edgegnn::ad {

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::Linear: return "linear";
    case OpKind::Relu: return "relu";
    case OpKind::Concat: return "concat";
    case OpKind::VStack: return "vstack";
    case OpKind::ReduceMax: return "reduce_max";
    case OpKind::SegmentMax: return "segment_max";
    case OpKind::SegmentSum: return "segment_sum";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::ComplexInnerRe: return "complex_inner_re";
    case OpKind::ComplexInnerIm: return "complex_inner_im";
    case OpKind::ComplexInnerRows: return "complex_inner_rows";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::Scale: return "scale";
    case OpKind::Square: return "square";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::Log: return "log";
    case OpKind::Sum: return "sum";
    case OpKind::RowSum: return "row_sum";
    case OpKind::MulRows: return "mul_rows";
    case OpKind::PowerFactor: return "power_factor";
  }
  return "unknown";
}

template <class T>
Var<T> Tape<T>::leaf(Tensor<T> value) {
  Node node;
  node.kind = OpKind::Leaf;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::leaf_ref(const Tensor<T>& value) {
  Node node;
  node.kind = OpKind::Leaf;
  node.external = &value;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node node;
  node.kind = OpKind::Constant;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::record(OpKind kind, std::vector<std::size_t> inputs, Tensor<T> value, BackwardFn backward) {
  Node node;
  node.kind = kind;
  node.value = std::move(value);
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) throw ArgumentError("tape input refers to a later node");
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  node.inputs = std::move(inputs);
  if (node.requires_grad && grad_enabled_) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

template <class T>
const Tensor<T>& Tape<T>::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

template <class T>
Tensor<T>* Tape<T>::accumulator(std::size_t id) {
  if (!nodes_[id].requires_grad) return nullptr;
  Tensor<T>& g = grads_[id];
  if (g.empty() && value(id).size() != 0) g = Tensor<T>(value(id).shape());
  return &g;
}

template <class T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape != this) throw ArgumentError("loss belongs to another tape");
  if (value(loss.id).size() != 1) {
    throw ArgumentError("backward needs a scalar loss, got shape " + to_string(value(loss.id).shape()));
  }
  grads_.assign(nodes_.size(), Tensor<T>());
  if (!nodes_[loss.id].requires_grad) return;
  *accumulator(loss.id) = Tensor<T>(value(loss.id).shape(), std::vector<T>{T{1}});
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || grads_[i].empty()) continue;
    n.backward(*this, i);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::Leaf) accumulator(i);
  }
}

template <class T>
const Tensor<T>& Tape<T>::grad(Var<T> v) const {
  if (v.id >= grads_.size() || grads_[v.id].empty()) {
    throw ArgumentError("no gradient recorded for node " + std::to_string(v.id));
  }
  return grads_[v.id];
}

template class Tape<float>;
template class Tape<double>;

}  // namespace edgegnn::ad
