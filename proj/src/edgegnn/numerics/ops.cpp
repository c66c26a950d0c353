// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgegnn/errors.hpp"

namespace edgegnn::ad {
namespace {

template <class T>
Tape<T>& tape_of(Var<T> v) {
  if (!v.tape) throw ArgumentError("variable is not attached to a tape");
  return *v.tape;
}

template <class T>
void same_tape(Var<T> a, Var<T> b) {
  if (a.tape != b.tape) throw ArgumentError("variables live on different tapes");
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

template <class T>
void require_rank2(const Tensor<T>& a, const char* op) {
  if (a.rank() != 2) throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " + to_string(a.shape()));
}

template <class T, class F, class G>
Var<T> unary(Var<T> x, OpKind kind, F&& fwd, G&& dfdx) {
  Tape<T>& t = tape_of(x);
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  std::size_t xid = x.id;
  return t.record(kind, {xid}, std::move(out), [xid, dfdx](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& in = tp.value(xid);
    const Tensor<T>& y = tp.value(self);
    Tensor<T>* dx = tp.accumulator(xid);
    for (std::size_t i = 0; i < g.size(); ++i) (*dx)[i] += g[i] * dfdx(in[i], y[i]);
  });
}

}  // namespace

template <class T>
Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias, std::span<const T> weight_t) {
  same_tape(x, weight);
  same_tape(x, bias);
  Tape<T>& t = tape_of(x);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& w = weight.value();
  const Tensor<T>& b = bias.value();
  if (w.rank() != 2 || b.rank() != 1 || (xv.rank() != 1 && xv.rank() != 2)) {
    throw DimensionError("linear: expected x [n_in] or [R, n_in], W [n_out, n_in], b [n_out]");
  }
  const std::size_t n_out = w.shape()[0];
  const std::size_t n_in = w.shape()[1];
  if (xv.cols() != n_in || b.size() != n_out) {
    throw DimensionError("linear: x " + to_string(xv.shape()) + ", W " + to_string(w.shape()) + ", b " +
                         to_string(b.shape()) + " do not conform");
  }
  const std::size_t rows = xv.rows();

  // W^T so the innermost loop runs over contiguous outputs.
  std::vector<T> local;
  if (weight_t.empty()) {
    local.resize(n_in * n_out);
    for (std::size_t o = 0; o < n_out; ++o)
      for (std::size_t i = 0; i < n_in; ++i) local[i * n_out + o] = w[o * n_in + i];
    weight_t = local;
  } else if (weight_t.size() != n_in * n_out) {
    throw DimensionError("linear: transposed weight has the wrong size");
  }
  const std::span<const T> wt = weight_t;

  Tensor<T> out(xv.rank() == 1 ? Shape{n_out} : Shape{rows, n_out});
  for (std::size_t r = 0; r < rows; ++r) {
    T* y = out.data().data() + r * n_out;
    const T* xr = xv.data().data() + r * n_in;
    for (std::size_t o = 0; o < n_out; ++o) y[o] = b[o];
    for (std::size_t i = 0; i < n_in; ++i) {
      const T xi = xr[i];
      if (xi == T{0}) continue;
      const T* wrow = wt.data() + i * n_out;
      for (std::size_t o = 0; o < n_out; ++o) y[o] += xi * wrow[o];
    }
  }

  const std::size_t xid = x.id, wid = weight.id, bid = bias.id;
  return t.record(OpKind::Linear, {xid, wid, bid}, std::move(out),
                  [xid, wid, bid, rows, n_in, n_out](Tape<T>& tp, std::size_t self) {
                    const T* g = tp.upstream(self).data().data();
                    const T* xd = tp.value(xid).data().data();
                    const T* wd = tp.value(wid).data().data();
                    if (Tensor<T>* dx = tp.accumulator(xid)) {
                      T* dxd = dx->data().data();
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t o = 0; o < n_out; ++o) {
                          const T go = g[r * n_out + o];
                          if (go == T{0}) continue;
                          const T* wrow = wd + o * n_in;
                          T* dxr = dxd + r * n_in;
                          for (std::size_t i = 0; i < n_in; ++i) dxr[i] += go * wrow[i];
                        }
                    }
                    if (Tensor<T>* dw = tp.accumulator(wid)) {
                      T* dwd = dw->data().data();
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t o = 0; o < n_out; ++o) {
                          const T go = g[r * n_out + o];
                          if (go == T{0}) continue;
                          const T* xr = xd + r * n_in;
                          T* dwr = dwd + o * n_in;
                          for (std::size_t i = 0; i < n_in; ++i) dwr[i] += go * xr[i];
                        }
                    }
                    if (Tensor<T>* db = tp.accumulator(bid)) {
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t o = 0; o < n_out; ++o) (*db)[o] += g[r * n_out + o];
                    }
                  });
}

template <class T>
Var<T> relu(Var<T> x) {
  return unary<T>(
      x, OpKind::Relu, [](T v) { return v > T{0} ? v : T{0}; },
      [](T in, T) { return in > T{0} ? T{1} : T{0}; });
}

template <class T>
Var<T> concat(std::span<const Var<T>> xs) {
  if (xs.empty()) throw ArgumentError("concat: empty input list");
  Tape<T>& t = tape_of(xs[0]);
  const std::size_t rank = xs[0].value().rank();
  const std::size_t rows = xs[0].value().rows();
  if (rank != 1 && rank != 2) throw DimensionError("concat: inputs must be rank 1 or 2");
  std::vector<std::size_t> ids, widths;
  std::size_t total = 0;
  for (const Var<T>& v : xs) {
    same_tape(xs[0], v);
    const Tensor<T>& tv = v.value();
    if (tv.rank() != rank || tv.rows() != rows) {
      throw DimensionError("concat: incompatible input " + to_string(tv.shape()));
    }
    ids.push_back(v.id);
    widths.push_back(tv.cols());
    total += tv.cols();
  }
  Tensor<T> out(rank == 1 ? Shape{total} : Shape{rows, total});
  std::size_t offset = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const Tensor<T>& tv = xs[j].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(tv.data().data() + r * widths[j], widths[j], out.data().data() + r * total + offset);
    offset += widths[j];
  }
  return t.record(OpKind::Concat, ids, std::move(out), [ids, widths, rows, total](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    std::size_t off = 0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (Tensor<T>* d = tp.accumulator(ids[j])) {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[j]; ++c) (*d)[r * widths[j] + c] += g[r * total + off + c];
      }
      off += widths[j];
    }
  });
}

template <class T>
Var<T> vstack(std::span<const Var<T>> xs) {
  if (xs.empty()) throw ArgumentError("vstack: empty input list");
  Tape<T>& t = tape_of(xs[0]);
  const std::size_t cols = xs[0].value().cols();
  std::vector<std::size_t> ids, counts;
  std::size_t total = 0;
  for (const Var<T>& v : xs) {
    same_tape(xs[0], v);
    const Tensor<T>& tv = v.value();
    require_rank2(tv, "vstack");
    if (tv.cols() != cols) throw DimensionError("vstack: column mismatch " + to_string(tv.shape()));
    ids.push_back(v.id);
    counts.push_back(tv.size());
    total += tv.rows();
  }
  Tensor<T> out(Shape{total, cols});
  std::size_t offset = 0;
  for (const Var<T>& v : xs) {
    std::copy(v.value().data().begin(), v.value().data().end(), out.data().begin() + offset);
    offset += v.value().size();
  }
  return t.record(OpKind::VStack, ids, std::move(out), [ids, counts](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    std::size_t off = 0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (Tensor<T>* d = tp.accumulator(ids[j]))
        for (std::size_t i = 0; i < counts[j]; ++i) (*d)[i] += g[off + i];
      off += counts[j];
    }
  });
}

template <class T>
Var<T> reduce_max(std::span<const Var<T>> xs) {
  if (xs.empty()) throw ArgumentError("reduce_max: empty input list");
  Tape<T>& t = tape_of(xs[0]);
  const Tensor<T>& first = xs[0].value();
  std::vector<std::size_t> ids;
  for (const Var<T>& v : xs) {
    same_tape(xs[0], v);
    require_same_shape(first, v.value(), "reduce_max");
    ids.push_back(v.id);
  }
  Tensor<T> out = first;
  std::vector<std::size_t> arg(first.size(), 0);
  for (std::size_t j = 1; j < xs.size(); ++j) {
    const Tensor<T>& tv = xs[j].value();
    for (std::size_t i = 0; i < tv.size(); ++i)
      if (tv[i] > out[i]) {
        out[i] = tv[i];
        arg[i] = j;
      }
  }
  return t.record(OpKind::ReduceMax, ids, std::move(out), [ids, arg](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (Tensor<T>* d = tp.accumulator(ids[arg[i]])) (*d)[i] += g[i];
  });
}

template <class T>
Var<T> segment_max(Var<T> x, const Groups& groups) {
  Tape<T>& t = tape_of(x);
  const Tensor<T>& xv = x.value();
  require_rank2(xv, "segment_max");
  const std::size_t cols = xv.cols();
  Tensor<T> out(Shape{groups.size(), cols});
  // argmax source row per output entry; npos for empty groups
  std::vector<std::size_t> arg(groups.size() * cols, static_cast<std::size_t>(-1));
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& members = groups[gi];
    if (members.empty()) continue;
    for (std::size_t r : members)
      if (r >= xv.rows()) throw DimensionError("segment_max: row index out of range");
    T* o = out.data().data() + gi * cols;
    std::size_t* a = arg.data() + gi * cols;
    const T* first = xv.data().data() + members[0] * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = first[c];
      a[c] = members[0];
    }
    for (std::size_t j = 1; j < members.size(); ++j) {
      const T* row = xv.data().data() + members[j] * cols;
      for (std::size_t c = 0; c < cols; ++c)
        if (row[c] > o[c]) {
          o[c] = row[c];
          a[c] = members[j];
        }
    }
  }
  const std::size_t xid = x.id;
  return t.record(OpKind::SegmentMax, {xid}, std::move(out), [xid, arg, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    Tensor<T>* d = tp.accumulator(xid);
    for (std::size_t i = 0; i < arg.size(); ++i)
      if (arg[i] != static_cast<std::size_t>(-1)) (*d)[arg[i] * cols + i % cols] += g[i];
  });
}

template <class T>
Var<T> segment_sum(Var<T> x, const Groups& groups) {
  Tape<T>& t = tape_of(x);
  const Tensor<T>& xv = x.value();
  require_rank2(xv, "segment_sum");
  const std::size_t cols = xv.cols();
  Tensor<T> out(Shape{groups.size(), cols});
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::size_t r : groups[gi]) {
      if (r >= xv.rows()) throw DimensionError("segment_sum: row index out of range");
      for (std::size_t c = 0; c < cols; ++c) out.at(gi, c) += xv.at(r, c);
    }
  const std::size_t xid = x.id;
  return t.record(OpKind::SegmentSum, {xid}, std::move(out), [xid, groups, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    Tensor<T>* d = tp.accumulator(xid);
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      for (std::size_t r : groups[gi])
        for (std::size_t c = 0; c < cols; ++c) d->at(r, c) += g.at(gi, c);
  });
}

template <class T>
Var<T> gather_rows(Var<T> x, std::span<const std::size_t> index) {
  Tape<T>& t = tape_of(x);
  const Tensor<T>& xv = x.value();
  require_rank2(xv, "gather_rows");
  const std::size_t cols = xv.cols();
  Tensor<T> out(Shape{index.size(), cols});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= xv.rows()) throw DimensionError("gather_rows: row index out of range");
    std::copy_n(xv.data().data() + index[i] * cols, cols, out.data().data() + i * cols);
  }
  const std::size_t xid = x.id;
  std::vector<std::size_t> idx(index.begin(), index.end());
  return t.record(OpKind::GatherRows, {xid}, std::move(out), [xid, idx, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    Tensor<T>* d = tp.accumulator(xid);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) d->at(idx[i], c) += g.at(i, c);
  });
}

template <class T>
ComplexSplit<Var<T>> complex_inner(const ComplexSplit<Var<T>>& h, const ComplexSplit<Var<T>>& v) {
  Tape<T>& t = tape_of(h.re);
  const Tensor<T>& hr = h.re.value();
  const Tensor<T>& hi = h.im.value();
  const Tensor<T>& vr = v.re.value();
  const Tensor<T>& vi = v.im.value();
  if (hr.rank() != 1 || hr.shape() != hi.shape() || vr.shape() != vi.shape()) {
    throw DimensionError("complex_inner: real and imaginary parts must be equal-length vectors");
  }
  if (hr.size() != vr.size()) {
    throw DimensionError("complex_inner: length mismatch " + std::to_string(hr.size()) + " vs " +
                         std::to_string(vr.size()));
  }
  T re{0}, im{0};
  for (std::size_t n = 0; n < hr.size(); ++n) {
    re += hr[n] * vr[n] + hi[n] * vi[n];
    im += hr[n] * vi[n] - hi[n] * vr[n];
  }
  const std::size_t a = h.re.id, b = h.im.id, c = v.re.id, d = v.im.id;
  std::vector<std::size_t> ids{a, b, c, d};
  // re = <hr, vr> + <hi, vi>
  Var<T> out_re = t.record(OpKind::ComplexInnerRe, ids, Tensor<T>::scalar(re), [a, b, c, d](Tape<T>& tp, std::size_t self) {
    const T g = tp.upstream(self)[0];
    const Tensor<T>&hr_ = tp.value(a), &hi_ = tp.value(b), &vr_ = tp.value(c), &vi_ = tp.value(d);
    if (auto* x = tp.accumulator(a)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * vr_[n];
    if (auto* x = tp.accumulator(b)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * vi_[n];
    if (auto* x = tp.accumulator(c)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * hr_[n];
    if (auto* x = tp.accumulator(d)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * hi_[n];
  });
  // im = <hr, vi> - <hi, vr>
  Var<T> out_im = t.record(OpKind::ComplexInnerIm, ids, Tensor<T>::scalar(im), [a, b, c, d](Tape<T>& tp, std::size_t self) {
    const T g = tp.upstream(self)[0];
    const Tensor<T>&hr_ = tp.value(a), &hi_ = tp.value(b), &vr_ = tp.value(c), &vi_ = tp.value(d);
    if (auto* x = tp.accumulator(a)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * vi_[n];
    if (auto* x = tp.accumulator(b)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] -= g * vr_[n];
    if (auto* x = tp.accumulator(c)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] -= g * hi_[n];
    if (auto* x = tp.accumulator(d)) for (std::size_t n = 0; n < x->size(); ++n) (*x)[n] += g * hr_[n];
  });
  return {out_re, out_im};
}

template <class T>
Var<T> complex_inner_rows(Var<T> a, Var<T> b, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  same_tape(a, b);
  Tape<T>& t = tape_of(a);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require_rank2(av, "complex_inner_rows");
  require_rank2(bv, "complex_inner_rows");
  if (av.cols() != bv.cols() || av.cols() % 2 != 0) {
    throw DimensionError("complex_inner_rows: rows must hold 2N reals on both sides");
  }
  const std::size_t n = av.cols() / 2;
  Tensor<T> out(Shape{pairs.size(), 2});
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].first >= av.rows() || pairs[p].second >= bv.rows())
      throw DimensionError("complex_inner_rows: row index out of range");
    auto x = av.row(pairs[p].first);
    auto y = bv.row(pairs[p].second);
    T re{0}, im{0};
    for (std::size_t k = 0; k < n; ++k) {
      re += x[k] * y[k] + x[n + k] * y[n + k];
      im += x[k] * y[n + k] - x[n + k] * y[k];
    }
    out.at(p, 0) = re;
    out.at(p, 1) = im;
  }
  const std::size_t aid = a.id, bid = b.id;
  std::vector<std::pair<std::size_t, std::size_t>> pv(pairs.begin(), pairs.end());
  return t.record(OpKind::ComplexInnerRows, {aid, bid}, std::move(out), [aid, bid, pv, n](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& av_ = tp.value(aid);
    const Tensor<T>& bv_ = tp.value(bid);
    Tensor<T>* da = tp.accumulator(aid);
    Tensor<T>* db = tp.accumulator(bid);
    for (std::size_t p = 0; p < pv.size(); ++p) {
      const T gr = g.at(p, 0), gi = g.at(p, 1);
      auto x = av_.row(pv[p].first);
      auto y = bv_.row(pv[p].second);
      if (da) {
        auto dx = da->row(pv[p].first);
        for (std::size_t k = 0; k < n; ++k) {
          dx[k] += gr * y[k] + gi * y[n + k];
          dx[n + k] += gr * y[n + k] - gi * y[k];
        }
      }
      if (db) {
        auto dy = db->row(pv[p].second);
        for (std::size_t k = 0; k < n; ++k) {
          dy[k] += gr * x[k] - gi * x[n + k];
          dy[n + k] += gr * x[n + k] + gi * x[k];
        }
      }
    }
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  same_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape_of(a).record(OpKind::Add, {aid, bid}, std::move(out), [aid, bid](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    if (auto* d = tp.accumulator(aid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
    if (auto* d = tp.accumulator(bid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  same_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape_of(a).record(OpKind::Sub, {aid, bid}, std::move(out), [aid, bid](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    if (auto* d = tp.accumulator(aid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
    if (auto* d = tp.accumulator(bid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] -= g[i];
  });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  same_tape(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape_of(a).record(OpKind::Mul, {aid, bid}, std::move(out), [aid, bid](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& av = tp.value(aid);
    const Tensor<T>& bv = tp.value(bid);
    if (auto* d = tp.accumulator(aid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i] * bv[i];
    if (auto* d = tp.accumulator(bid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i] * av[i];
  });
}

template <class T>
Var<T> div(Var<T> a, Var<T> b) {
  same_tape(a, b);
  require_same_shape(a.value(), b.value(), "div");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape_of(a).record(OpKind::Div, {aid, bid}, std::move(out), [aid, bid](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& bv = tp.value(bid);
    const Tensor<T>& y = tp.value(self);
    if (auto* d = tp.accumulator(aid)) for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i] / bv[i];
    if (auto* d = tp.accumulator(bid))
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] -= g[i] * y[i] / bv[i];
  });
}

template <class T>
Var<T> add_scalar(Var<T> x, T c) {
  return unary<T>(x, OpKind::AddScalar, [c](T v) { return v + c; }, [](T, T) { return T{1}; });
}

template <class T>
Var<T> scale(Var<T> x, T c) {
  return unary<T>(x, OpKind::Scale, [c](T v) { return v * c; }, [c](T, T) { return c; });
}

template <class T>
Var<T> square(Var<T> x) {
  return unary<T>(x, OpKind::Square, [](T v) { return v * v; }, [](T in, T) { return T{2} * in; });
}

template <class T>
Var<T> sqrt(Var<T> x) {
  for (T v : x.value().data())
    if (v < T{0}) throw NumericError("sqrt of a negative value");
  return unary<T>(
      x, OpKind::Sqrt, [](T v) { return std::sqrt(v); },
      [](T, T y) { return y > T{0} ? T{0.5} / y : T{0}; });
}

template <class T>
Var<T> log(Var<T> x) {
  for (T v : x.value().data())
    if (!(v > T{0})) throw NumericError("log of a non-positive value");
  return unary<T>(x, OpKind::Log, [](T v) { return std::log(v); }, [](T in, T) { return T{1} / in; });
}

template <class T>
Var<T> sum(Var<T> x) {
  T s{0};
  for (T v : x.value().data()) s += v;
  const std::size_t xid = x.id;
  return tape_of(x).record(OpKind::Sum, {xid}, Tensor<T>::scalar(s), [xid](Tape<T>& tp, std::size_t self) {
    const T g = tp.upstream(self)[0];
    Tensor<T>* d = tp.accumulator(xid);
    for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += g;
  });
}

template <class T>
Var<T> row_sum(Var<T> x) {
  const Tensor<T>& xv = x.value();
  require_rank2(xv, "row_sum");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor<T> out(Shape{rows, 1});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r] += xv.at(r, c);
  const std::size_t xid = x.id;
  return tape_of(x).record(OpKind::RowSum, {xid}, std::move(out), [xid, rows, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    Tensor<T>* d = tp.accumulator(xid);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) d->at(r, c) += g[r];
  });
}

template <class T>
Var<T> mul_rows(Var<T> x, Var<T> s) {
  same_tape(x, s);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& sv = s.value();
  require_rank2(xv, "mul_rows");
  if (sv.size() != xv.rows()) throw DimensionError("mul_rows: need one scale per row");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor<T> out = xv;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) *= sv[r];
  const std::size_t xid = x.id, sid = s.id;
  return tape_of(x).record(OpKind::MulRows, {xid, sid}, std::move(out), [xid, sid, rows, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& xv_ = tp.value(xid);
    const Tensor<T>& sv_ = tp.value(sid);
    if (auto* d = tp.accumulator(xid))
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) d->at(r, c) += g.at(r, c) * sv_[r];
    if (auto* d = tp.accumulator(sid))
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) (*d)[r] += g.at(r, c) * xv_.at(r, c);
  });
}

template <class T>
Var<T> power_factor(Var<T> p, Var<T> cap, PowerNormalization mode) {
  same_tape(p, cap);
  require_same_shape(p.value(), cap.value(), "power_factor");
  if (cap.tape->requires_grad(cap.id)) throw ArgumentError("power_factor: budget must be a constant");
  const Tensor<T>& pv = p.value();
  const Tensor<T>& cv = cap.value();
  Tensor<T> out(pv.shape());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const bool scaled = mode == PowerNormalization::Projection ? pv[i] > cv[i] : pv[i] > T{0};
    out[i] = scaled ? std::sqrt(cv[i] / pv[i]) : T{1};
  }
  const std::size_t pid = p.id, cid = cap.id;
  return tape_of(p).record(OpKind::PowerFactor, {pid, cid}, std::move(out), [pid, cid, mode](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.upstream(self);
    const Tensor<T>& pv_ = tp.value(pid);
    const Tensor<T>& cv_ = tp.value(cid);
    const Tensor<T>& f = tp.value(self);
    Tensor<T>* d = tp.accumulator(pid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool scaled = mode == PowerNormalization::Projection ? pv_[i] > cv_[i] : pv_[i] > T{0};
      if (scaled) (*d)[i] += g[i] * (T{-0.5} * f[i] / pv_[i]);
    }
  });
}

#define EDGEGNN_INSTANTIATE_OPS(T)                                                                         \
  template Var<T> linear<T>(Var<T>, Var<T>, Var<T>, std::span<const T>);                                                   \
  template Var<T> relu<T>(Var<T>);                                                                         \
  template Var<T> concat<T>(std::span<const Var<T>>);                                                      \
  template Var<T> vstack<T>(std::span<const Var<T>>);                                                      \
  template Var<T> reduce_max<T>(std::span<const Var<T>>);                                                  \
  template Var<T> segment_max<T>(Var<T>, const Groups&);                                                   \
  template Var<T> segment_sum<T>(Var<T>, const Groups&);                                                   \
  template Var<T> gather_rows<T>(Var<T>, std::span<const std::size_t>);                                    \
  template ComplexSplit<Var<T>> complex_inner<T>(const ComplexSplit<Var<T>>&, const ComplexSplit<Var<T>>&); \
  template Var<T> complex_inner_rows<T>(Var<T>, Var<T>, std::span<const std::pair<std::size_t, std::size_t>>); \
  template Var<T> add<T>(Var<T>, Var<T>);                                                                  \
  template Var<T> sub<T>(Var<T>, Var<T>);                                                                  \
  template Var<T> mul<T>(Var<T>, Var<T>);                                                                  \
  template Var<T> div<T>(Var<T>, Var<T>);                                                                  \
  template Var<T> add_scalar<T>(Var<T>, T);                                                                \
  template Var<T> scale<T>(Var<T>, T);                                                                     \
  template Var<T> square<T>(Var<T>);                                                                       \
  template Var<T> sqrt<T>(Var<T>);                                                                         \
  template Var<T> log<T>(Var<T>);                                                                          \
  template Var<T> sum<T>(Var<T>);                                                                          \
  template Var<T> row_sum<T>(Var<T>);                                                                      \
  template Var<T> mul_rows<T>(Var<T>, Var<T>);                                                             \
  template Var<T> power_factor<T>(Var<T>, Var<T>, PowerNormalization);

EDGEGNN_INSTANTIATE_OPS(float)
EDGEGNN_INSTANTIATE_OPS(double)

}  // namespace edgegnn::ad
