// seqtrans/tape.hpp
//
// Reverse-mode gradient substrate over a fixed primitive set. Forward values
// are computed eagerly when an operation is recorded; backward() replays the
// record in exact reverse order. This is not a general autodiff: only the
// primitives the models need exist, so every gradient path is auditable.

// Copyright 2026 seqtrans authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQTRANS_TAPE_HPP_
#define SEQTRANS_TAPE_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "seqtrans/tensor.hpp"

namespace seqtrans {

struct Val {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  enum class Op : uint8_t {
    kInput,
    kAffine,      // args: x, w [, bias]
    kTanh,
    kSigmoid,
    kSoftmax,     // whole tensor as one distribution
    kLogSoftmax,  // whole tensor as one distribution
    kAdd,         // same shape, or args[1] a vector broadcast over rows
    kMul,         // same shape
    kConv1d,      // args: signal, filters
    kGather,      // element picks by index; backward scatter-adds
    kConcat,      // row/flat concatenation; backward slices
  };

  Val input(Tensor t) { return push(Op::kInput, {}, std::move(t)); }

  Val constant(double v) { return input(Tensor::scalar(v)); }

  Val affine(Val x, Val w) { return affine_impl(x, w, Val{}); }
  Val affine(Val x, Val w, Val bias) { return affine_impl(x, w, bias); }

  Val tanh(Val x) { return push(Op::kTanh, {x.id}, tanh_t(value(x))); }

  Val sigmoid(Val x) { return push(Op::kSigmoid, {x.id}, sigmoid_t(value(x))); }

  Val softmax(Val x) {
    Tensor y = value(x);
    softmax_inplace(std::span<double>(y.data));
    return push(Op::kSoftmax, {x.id}, std::move(y));
  }

  Val log_softmax(Val x) {
    Tensor y = value(x);
    log_softmax_inplace(std::span<double>(y.data));
    return push(Op::kLogSoftmax, {x.id}, std::move(y));
  }

  Val add(Val a, Val b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    Tensor y = ta;
    if (ta.same_shape(tb)) {
      for (int64_t i = 0; i < y.numel(); ++i) y.at(i) += tb.at(i);
    } else {
      // Row broadcast: b is a vector matching the row length of a.
      ST_REQUIRE(ta.ndim() == 2 && tb.numel() == ta.shape[1],
                 "add: shapes incompatible");
      for (int64_t r = 0; r < ta.shape[0]; ++r)
        for (int64_t c = 0; c < ta.shape[1]; ++c) y.at(r, c) += tb.at(c);
    }
    return push(Op::kAdd, {a.id, b.id}, std::move(y));
  }

  Val mul(Val a, Val b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    ST_REQUIRE(ta.numel() == tb.numel(), "mul: element counts differ");
    Tensor y = ta;
    for (int64_t i = 0; i < y.numel(); ++i) y.at(i) *= tb.at(i);
    return push(Op::kMul, {a.id, b.id}, std::move(y));
  }

  Val conv1d_same(Val signal, Val filters) {
    return push(Op::kConv1d, {signal.id, filters.id},
                seqtrans::conv1d_same(value(signal), value(filters)));
  }

  Val gather(Val x, std::vector<int64_t> idx, std::vector<int64_t> out_shape = {}) {
    const Tensor& tx = value(x);
    if (out_shape.empty()) out_shape = {static_cast<int64_t>(idx.size())};
    ST_REQUIRE(Tensor::numel_of(out_shape) == static_cast<int64_t>(idx.size()),
               "gather: output shape does not match index count");
    Tensor y = Tensor::zeros(out_shape);
    for (size_t i = 0; i < idx.size(); ++i) {
      ST_REQUIRE(idx[i] >= 0 && idx[i] < tx.numel(), "gather: index out of range");
      y.at(static_cast<int64_t>(i)) = tx.at(idx[i]);
    }
    Val v = push(Op::kGather, {x.id}, std::move(y));
    nodes_[v.id].indices = std::move(idx);
    return v;
  }

  // Data-movement conveniences on top of gather.
  Val reshape(Val x, std::vector<int64_t> shape) {
    std::vector<int64_t> idx(static_cast<size_t>(value(x).numel()));
    std::iota(idx.begin(), idx.end(), 0);
    return gather(x, std::move(idx), std::move(shape));
  }

  Val slice(Val x, int64_t start, int64_t len) {
    std::vector<int64_t> idx(static_cast<size_t>(len));
    std::iota(idx.begin(), idx.end(), start);
    return gather(x, std::move(idx));
  }

  Val row(Val m, int64_t r) {
    const Tensor& tm = value(m);
    ST_REQUIRE(tm.ndim() == 2 && r >= 0 && r < tm.shape[0], "row: out of range");
    return slice(m, r * tm.shape[1], tm.shape[1]);
  }

  // Concatenates the arguments' flat data. as_rows stacks equal-length
  // vectors into an (n x len) matrix instead of one long vector.
  Val concat(std::span<const Val> parts, bool as_rows = false) {
    ST_REQUIRE(!parts.empty(), "concat: no arguments");
    int64_t total = 0;
    for (Val p : parts) total += value(p).numel();
    std::vector<int64_t> shape;
    if (as_rows) {
      int64_t len = value(parts[0]).numel();
      for (Val p : parts) ST_REQUIRE(value(p).numel() == len, "concat: ragged rows");
      shape = {static_cast<int64_t>(parts.size()), len};
    } else {
      shape = {total};
    }
    Tensor y = Tensor::zeros(shape);
    std::vector<int32_t> args;
    int64_t off = 0;
    for (Val p : parts) {
      const Tensor& tp = value(p);
      std::copy(tp.data.begin(), tp.data.end(), y.data.begin() + off);
      off += tp.numel();
      args.push_back(p.id);
    }
    return push(Op::kConcat, std::move(args), std::move(y));
  }

  Val concat(std::initializer_list<Val> parts, bool as_rows = false) {
    return concat(std::span<const Val>(parts.begin(), parts.size()), as_rows);
  }

  const Tensor& value(Val v) const { return nodes_[check(v)].value; }
  const Tensor& grad(Val v) const { return nodes_[check(v)].grad; }
  size_t size() const { return nodes_.size(); }

  // Seeds the given output gradients and sweeps the record in reverse.
  // Several seeds may be given at once (e.g. one per lattice frame).
  void backward(std::span<const std::pair<Val, Tensor>> seeds) {
    for (auto& n : nodes_) {
      n.grad = Tensor::zeros(n.value.shape);
    }
    for (const auto& [v, g] : seeds) {
      Node& n = nodes_[check(v)];
      ST_REQUIRE(g.numel() == n.value.numel(), "backward: seed shape mismatch");
      for (int64_t i = 0; i < g.numel(); ++i) n.grad.at(i) += g.at(i);
    }
    for (int32_t id = static_cast<int32_t>(nodes_.size()) - 1; id >= 0; --id) {
      backprop(nodes_[id]);
    }
  }

  void backward(Val scalar_out) {
    std::pair<Val, Tensor> seed{scalar_out, Tensor::scalar(1.0)};
    backward(std::span<const std::pair<Val, Tensor>>(&seed, 1));
  }

 private:
  struct Node {
    Op op;
    std::vector<int32_t> args;
    Tensor value;
    Tensor grad;
    std::vector<int64_t> indices;  // kGather only
  };

  int32_t check(Val v) const {
    ST_REQUIRE(v.valid() && v.id < static_cast<int32_t>(nodes_.size()),
               "invalid tape value");
    return v.id;
  }

  Val push(Op op, std::vector<int32_t> args, Tensor value) {
    nodes_.push_back(Node{op, std::move(args), std::move(value), {}, {}});
    return Val{static_cast<int32_t>(nodes_.size()) - 1};
  }

  Val affine_impl(Val x, Val w, Val bias) {
    const Tensor* b = bias.valid() ? &value(bias) : nullptr;
    Tensor y = seqtrans::affine(value(x), value(w), b);
    std::vector<int32_t> args = {x.id, w.id};
    if (bias.valid()) args.push_back(bias.id);
    return push(Op::kAffine, std::move(args), std::move(y));
  }

  void backprop(Node& n) {
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kAffine: {
        Node& nx = nodes_[n.args[0]];
        Node& nw = nodes_[n.args[1]];
        int64_t k = nw.value.shape[0], out = nw.value.shape[1];
        int64_t m = (nx.value.ndim() == 2) ? nx.value.shape[0] : 1;
        for (int64_t i = 0; i < m; ++i) {
          const double* xr = nx.value.data.data() + i * k;
          const double* gr = g.data.data() + i * out;
          double* gxr = nx.grad.data.data() + i * k;
          for (int64_t p = 0; p < k; ++p) {
            const double* wr = nw.value.data.data() + p * out;
            double* gwr = nw.grad.data.data() + p * out;
            double acc = 0.0;
            double xv = xr[p];
            for (int64_t j = 0; j < out; ++j) {
              acc += wr[j] * gr[j];
              gwr[j] += xv * gr[j];
            }
            gxr[p] += acc;
          }
        }
        if (n.args.size() == 3) {
          Node& nb = nodes_[n.args[2]];
          for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < out; ++j) nb.grad.at(j) += g.data[i * out + j];
        }
        break;
      }
      case Op::kTanh: {
        Node& nx = nodes_[n.args[0]];
        for (int64_t i = 0; i < g.numel(); ++i) {
          double y = n.value.at(i);
          nx.grad.at(i) += g.at(i) * (1.0 - y * y);
        }
        break;
      }
      case Op::kSigmoid: {
        Node& nx = nodes_[n.args[0]];
        for (int64_t i = 0; i < g.numel(); ++i) {
          double y = n.value.at(i);
          nx.grad.at(i) += g.at(i) * y * (1.0 - y);
        }
        break;
      }
      case Op::kSoftmax: {
        Node& nx = nodes_[n.args[0]];
        double dot = 0.0;
        for (int64_t i = 0; i < g.numel(); ++i) dot += g.at(i) * n.value.at(i);
        for (int64_t i = 0; i < g.numel(); ++i)
          nx.grad.at(i) += n.value.at(i) * (g.at(i) - dot);
        break;
      }
      case Op::kLogSoftmax: {
        Node& nx = nodes_[n.args[0]];
        double gsum = 0.0;
        for (int64_t i = 0; i < g.numel(); ++i) gsum += g.at(i);
        for (int64_t i = 0; i < g.numel(); ++i)
          nx.grad.at(i) += g.at(i) - std::exp(n.value.at(i)) * gsum;
        break;
      }
      case Op::kAdd: {
        Node& na = nodes_[n.args[0]];
        Node& nb = nodes_[n.args[1]];
        for (int64_t i = 0; i < g.numel(); ++i) na.grad.at(i) += g.at(i);
        if (na.value.same_shape(nb.value)) {
          for (int64_t i = 0; i < g.numel(); ++i) nb.grad.at(i) += g.at(i);
        } else {  // broadcast vector: column sums
          int64_t c = na.value.shape[1];
          for (int64_t i = 0; i < g.numel(); ++i) nb.grad.at(i % c) += g.at(i);
        }
        break;
      }
      case Op::kMul: {
        Node& na = nodes_[n.args[0]];
        Node& nb = nodes_[n.args[1]];
        for (int64_t i = 0; i < g.numel(); ++i) {
          na.grad.at(i) += g.at(i) * nb.value.at(i);
          nb.grad.at(i) += g.at(i) * na.value.at(i);
        }
        break;
      }
      case Op::kConv1d: {
        Node& ns = nodes_[n.args[0]];
        Node& nf = nodes_[n.args[1]];
        int64_t s_len = ns.value.numel();
        int64_t nfil = nf.value.shape[0], w = nf.value.shape[1];
        int64_t center = (w - 1) / 2;
        for (int64_t f = 0; f < nfil; ++f) {
          for (int64_t s = 0; s < s_len; ++s) {
            double go = g.at(s, f);
            if (go == 0.0) continue;
            for (int64_t kk = 0; kk < w; ++kk) {
              int64_t j = s + kk - center;
              if (j < 0 || j >= s_len) continue;
              ns.grad.at(j) += go * nf.value.at(f, kk);
              nf.grad.at(f, kk) += go * ns.value.at(j);
            }
          }
        }
        break;
      }
      case Op::kGather: {
        Node& nx = nodes_[n.args[0]];
        for (size_t i = 0; i < n.indices.size(); ++i)
          nx.grad.at(n.indices[i]) += g.at(static_cast<int64_t>(i));
        break;
      }
      case Op::kConcat: {
        int64_t off = 0;
        for (int32_t a : n.args) {
          Node& na = nodes_[a];
          for (int64_t i = 0; i < na.value.numel(); ++i)
            na.grad.at(i) += g.at(off + i);
          off += na.value.numel();
        }
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace seqtrans

#endif  // SEQTRANS_TAPE_HPP_
