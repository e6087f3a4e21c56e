// seqtrans/tensor.hpp
//
// Small dense row-major tensors (64-bit float) and the forward math kernels
// shared by the gradient tape and the decoders.

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

#ifndef SEQTRANS_TENSOR_HPP_
#define SEQTRANS_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "seqtrans/common.hpp"

namespace seqtrans {

struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    ST_REQUIRE(numel_of(shape) == static_cast<int64_t>(data.size()),
               "tensor data length does not match shape");
  }

  static int64_t numel_of(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<int64_t> s) {
    int64_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  static Tensor full(std::vector<int64_t> s, double v) {
    int64_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), v));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor vector(std::vector<double> d) {
    int64_t n = static_cast<int64_t>(d.size());
    return Tensor({n}, std::move(d));
  }

  static Tensor matrix(int64_t r, int64_t c, std::vector<double> d) {
    return Tensor({r, c}, std::move(d));
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int64_t rows() const { return ndim() == 2 ? shape[0] : 1; }
  int64_t cols() const { return ndim() == 2 ? shape[1] : shape[0]; }

  double& at(int64_t i) { return data[static_cast<size_t>(i)]; }
  double at(int64_t i) const { return data[static_cast<size_t>(i)]; }
  double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
  double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// ---------------------------------------------------------------------------
// Log-semiring helpers.
// ---------------------------------------------------------------------------

// log(exp(a) + exp(b)) with -inf as the additive identity.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log sum exp with max-subtraction; -inf iff every input is -inf.
inline double logsumexp(std::span<const double> values) {
  ST_REQUIRE(!values.empty(), "logsumexp: empty input");
  double hi = kLogZero;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kLogZero) return kLogZero;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

inline double logsumexp(const std::vector<double>& values) {
  return logsumexp(std::span<const double>(values));
}

// ---------------------------------------------------------------------------
// Forward kernels. All operate on flat data; callers own the shapes.
// ---------------------------------------------------------------------------

inline void softmax_inplace(std::span<double> x) {
  double hi = kLogZero;
  for (double v : x) hi = std::max(hi, v);
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

inline std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  softmax_inplace(std::span<double>(y));
  return y;
}

inline void log_softmax_inplace(std::span<double> x) {
  double lse = logsumexp(std::span<const double>(x.data(), x.size()));
  for (double& v : x) v -= lse;
}

inline std::vector<double> log_softmax(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  log_softmax_inplace(std::span<double>(y));
  return y;
}

// X (m x k, or a bare k-vector treated as one row) times W (k x n), plus an
// optional length-n bias added to every row. Vector input gives vector output.
inline Tensor affine(const Tensor& x, const Tensor& w, const Tensor* bias = nullptr) {
  ST_REQUIRE(w.ndim() == 2, "affine: weight must be a matrix");
  int64_t k = w.shape[0], n = w.shape[1];
  int64_t m = (x.ndim() == 2) ? x.shape[0] : 1;
  int64_t xk = (x.ndim() == 2) ? x.shape[1] : x.shape[0];
  ST_REQUIRE(xk == k, "affine: inner dimensions differ");
  if (bias != nullptr) ST_REQUIRE(bias->numel() == n, "affine: bias length mismatch");
  Tensor y = (x.ndim() == 2) ? Tensor::zeros({m, n}) : Tensor::zeros({n});
  for (int64_t i = 0; i < m; ++i) {
    const double* xr = x.data.data() + i * k;
    double* yr = y.data.data() + i * n;
    if (bias != nullptr) {
      for (int64_t j = 0; j < n; ++j) yr[j] = bias->at(j);
    }
    for (int64_t p = 0; p < k; ++p) {
      double xv = xr[p];
      if (xv == 0.0) continue;
      const double* wr = w.data.data() + p * n;
      for (int64_t j = 0; j < n; ++j) yr[j] += xv * wr[j];
    }
  }
  return y;
}

inline Tensor tanh_t(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = std::tanh(v);
  return y;
}

inline Tensor sigmoid_t(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

// "Same"-length 1-D convolution with zero padding. signal has length S,
// filters is (nf x w); result is (S x nf). The filter center is left-biased
// for even widths: center = (w - 1) / 2.
inline Tensor conv1d_same(const Tensor& signal, const Tensor& filters) {
  ST_REQUIRE(signal.numel() > 0, "conv1d_same: empty signal");
  ST_REQUIRE(filters.ndim() == 2, "conv1d_same: filters must be (count x width)");
  int64_t s_len = signal.numel();
  int64_t nf = filters.shape[0], w = filters.shape[1];
  int64_t center = (w - 1) / 2;
  Tensor out = Tensor::zeros({s_len, nf});
  for (int64_t f = 0; f < nf; ++f) {
    const double* flt = filters.data.data() + f * w;
    for (int64_t s = 0; s < s_len; ++s) {
      double acc = 0.0;
      for (int64_t k = 0; k < w; ++k) {
        int64_t j = s + k - center;
        if (j >= 0 && j < s_len) acc += flt[k] * signal.at(j);
      }
      out.at(s, f) = acc;
    }
  }
  return out;
}

}  // namespace seqtrans

#endif  // SEQTRANS_TENSOR_HPP_
