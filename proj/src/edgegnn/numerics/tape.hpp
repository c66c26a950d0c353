// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "edgegnn/numerics/tensor.hpp"

namespace edgegnn::ad {

enum class OpKind {
  Leaf,
  Constant,
  Linear,
  Relu,
  Concat,
  VStack,
  ReduceMax,
  SegmentMax,
  SegmentSum,
  GatherRows,
  ComplexInnerRe,
  ComplexInnerIm,
  ComplexInnerRows,
  Add,
  Sub,
  Mul,
  Div,
  AddScalar,
  Scale,
  Square,
  Sqrt,
  Log,
  Sum,
  RowSum,
  MulRows,
  PowerFactor,
};

const char* to_string(OpKind kind);

template <class T>
class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Append-only record of a forward evaluation. Nodes are stored in creation
/// order, so every node's inputs precede it and a reverse sweep is a valid
/// reverse-topological order.
///
/// One tape per evaluation; tapes are not shared across threads.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input; the tape owns a copy of the value.
  Var<T> leaf(Tensor<T> value);
  /// Differentiable input that refers to caller-owned storage. The referenced
  /// tensor must outlive the tape and stay unmodified while it is in use.
  Var<T> leaf_ref(const Tensor<T>& value);
  /// Input that never receives a gradient.
  Var<T> constant(Tensor<T> value);

  /// Appends an op node. The backward rule is dropped when no input requires
  /// a gradient or when gradient recording is disabled.
  Var<T> record(OpKind kind, std::vector<std::size_t> inputs, Tensor<T> value, BackwardFn backward);

  /// Reverse-mode sweep from a scalar node. Clears all previous gradients
  /// first; afterwards every leaf holds d(loss)/d(leaf).
  void backward(Var<T> loss);

  const Tensor<T>& value(std::size_t id) const;
  const Tensor<T>& grad(Var<T> v) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  OpKind kind(std::size_t id) const { return nodes_[id].kind; }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Upstream gradient of a node during backward.
  const Tensor<T>& upstream(std::size_t id) const { return grads_[id]; }
  /// Accumulator for an input's gradient, or nullptr if it needs none.
  Tensor<T>* accumulator(std::size_t id);

  void set_grad_enabled(bool enabled) noexcept { grad_enabled_ = enabled; }
  bool grad_enabled() const noexcept { return grad_enabled_; }

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    std::vector<std::size_t> inputs;
    Tensor<T> value;
    const Tensor<T>* external = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor<T>> grads_;
  bool grad_enabled_ = true;
};

template <class T>
const Tensor<T>& Var<T>::value() const {
  return tape->value(id);
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace edgegnn::ad
