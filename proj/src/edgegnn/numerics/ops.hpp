// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "edgegnn/numerics/tape.hpp"

namespace edgegnn::ad {

/// Row groups for segment reductions: output row g reduces input rows groups[g].
using Groups = std::vector<std::vector<std::size_t>>;

/// out = W·x + b. `x` is a vector [n_in] or a row batch [R, n_in]; each row is
/// computed independently with a fixed summation order, so a row's result does
/// not depend on its position or on the other rows.
///
/// `weight_t`, when non-empty, must hold W^T ([n_in, n_out] row-major) and
/// saves the per-call transpose; results are identical either way.
template <class T>
Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias, std::span<const T> weight_t = {});

/// Elementwise max(0, x); the subgradient at 0 is 0.
template <class T>
Var<T> relu(Var<T> x);

/// Concatenation along the last axis. Rank-1 inputs give a vector; rank-2
/// inputs must share the row count.
template <class T>
Var<T> concat(std::span<const Var<T>> xs);

/// Row stacking of rank-2 inputs with equal column counts.
template <class T>
Var<T> vstack(std::span<const Var<T>> xs);

/// Elementwise maximum over equally shaped tensors. The gradient flows to the
/// first list entry attaining the maximum.
template <class T>
Var<T> reduce_max(std::span<const Var<T>> xs);

/// Row-group maximum of x [R, C] -> [G, C]. Empty groups yield zero rows; ties
/// route the gradient to the earliest row in the group's list.
template <class T>
Var<T> segment_max(Var<T> x, const Groups& groups);

/// Row-group sum of x [R, C] -> [G, C], summed in list order.
template <class T>
Var<T> segment_sum(Var<T> x, const Groups& groups);

/// Rows x[index[i]] for each i; out is [index.size(), C].
template <class T>
Var<T> gather_rows(Var<T> x, std::span<const std::size_t> index);

/// h^H v for vectors stored as split real/imaginary parts; returns [1]-shaped parts.
template <class T>
ComplexSplit<Var<T>> complex_inner(const ComplexSplit<Var<T>>& h, const ComplexSplit<Var<T>>& v);

/// Batched h^H v. Rows of `a` and `b` hold [re_0..re_{N-1}, im_0..im_{N-1}].
/// Output row p is (re, im) of a[pairs[p].first]^H b[pairs[p].second].
template <class T>
Var<T> complex_inner_rows(Var<T> a, Var<T> b, std::span<const std::pair<std::size_t, std::size_t>> pairs);

template <class T>
Var<T> add(Var<T> a, Var<T> b);
template <class T>
Var<T> sub(Var<T> a, Var<T> b);
template <class T>
Var<T> mul(Var<T> a, Var<T> b);
template <class T>
Var<T> div(Var<T> a, Var<T> b);
template <class T>
Var<T> add_scalar(Var<T> x, T c);
template <class T>
Var<T> scale(Var<T> x, T c);
template <class T>
Var<T> square(Var<T> x);
template <class T>
Var<T> sqrt(Var<T> x);
/// Natural log; non-positive input raises NumericError.
template <class T>
Var<T> log(Var<T> x);
/// Sum of all entries -> [1].
template <class T>
Var<T> sum(Var<T> x);
/// Per-row sum [R, C] -> [R, 1].
template <class T>
Var<T> row_sum(Var<T> x);
/// Scales row r of x [R, C] by s[r]; s is [R, 1].
template <class T>
Var<T> mul_rows(Var<T> x, Var<T> s);

enum class PowerNormalization {
  Projection,  ///< scale down only blocks over budget
  Boundary,    ///< scale every nonzero block onto its budget
};

/// Per-entry amplitude factor that brings power p onto budget cap:
/// sqrt(cap / p) when p exceeds cap (Projection) or p > 0 (Boundary), else 1.
/// `cap` must not require gradients.
template <class T>
Var<T> power_factor(Var<T> p, Var<T> cap, PowerNormalization mode);

}  // namespace edgegnn::ad
