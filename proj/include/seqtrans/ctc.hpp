// seqtrans/ctc.hpp
//
// CTC: path collapse, the blank-interleaved forward-backward loss with its
// analytic gradient, and best-path decoding.

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

#ifndef SEQTRANS_CTC_HPP_
#define SEQTRANS_CTC_HPP_

#include <vector>

#include "seqtrans/tensor.hpp"

namespace seqtrans {
namespace ctc {

// Per-frame log-probabilities over |A|+1 units, blank included.
struct LogLattice {
  int64_t frames = 0;
  int64_t num_units = 0;  // includes blank
  int blank = 0;
  std::vector<double> logp;  // frames x num_units, row-major

  LogLattice() = default;
  LogLattice(int64_t t, int64_t n, int blank_id)
      : frames(t), num_units(n), blank(blank_id),
        logp(static_cast<size_t>(t * n), kLogZero) {}

  double at(int64_t t, int64_t k) const { return logp[static_cast<size_t>(t * num_units + k)]; }
  double& at(int64_t t, int64_t k) { return logp[static_cast<size_t>(t * num_units + k)]; }
};

// The two contraction rules, in order: collapse runs, then drop blanks.
inline std::vector<int> collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != blank) out.push_back(s);
    prev = s;
  }
  return out;
}

struct CtcLossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d log-probs, frames x num_units
};

// Number of frames any alignment of the target needs.
inline int64_t min_frames(const std::vector<int>& target) {
  int64_t need = static_cast<int64_t>(target.size());
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++need;
  return need;
}

// loss = -ln sum over collapsing paths of the per-frame probabilities,
// computed over the blank-interleaved extended target. The gradient is the
// negated posterior unit occupancy per frame; callers compose it with the
// log-softmax backward. Infeasible targets give +inf loss and zero gradient.
inline CtcLossResult ctc_loss(const LogLattice& lat, const std::vector<int>& target) {
  ST_REQUIRE(lat.frames > 0, "ctc_loss: empty lattice");
  const int64_t t_len = lat.frames;
  const int64_t u_len = static_cast<int64_t>(target.size());
  CtcLossResult res;
  res.grad = Tensor::zeros({t_len, lat.num_units});
  if (min_frames(target) > t_len) {
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }

  // Extended target: blank, y1, blank, y2, ..., yU, blank.
  const int64_t m_len = 2 * u_len + 1;
  auto sym = [&](int64_t m) -> int {
    return (m % 2 == 0) ? lat.blank : target[static_cast<size_t>(m / 2)];
  };

  std::vector<double> alpha(static_cast<size_t>(t_len * m_len), kLogZero);
  std::vector<double> beta(static_cast<size_t>(t_len * m_len), kLogZero);
  auto a = [&](int64_t t, int64_t m) -> double& { return alpha[static_cast<size_t>(t * m_len + m)]; };
  auto b = [&](int64_t t, int64_t m) -> double& { return beta[static_cast<size_t>(t * m_len + m)]; };

  a(0, 0) = lat.at(0, lat.blank);
  if (m_len > 1) a(0, 1) = lat.at(0, sym(1));
  for (int64_t t = 1; t < t_len; ++t) {
    for (int64_t m = 0; m < m_len; ++m) {
      double acc = a(t - 1, m);
      if (m >= 1) acc = log_add(acc, a(t - 1, m - 1));
      if (m >= 2 && m % 2 == 1 && sym(m) != sym(m - 2))
        acc = log_add(acc, a(t - 1, m - 2));
      a(t, m) = acc + lat.at(t, sym(m));
    }
  }

  double log_p = a(t_len - 1, m_len - 1);
  if (m_len > 1) log_p = log_add(log_p, a(t_len - 1, m_len - 2));
  res.loss = -log_p;
  if (log_p == kLogZero) {  // no surviving path (some unit had true zero mass)
    res.loss = std::numeric_limits<double>::infinity();
    return res;
  }

  b(t_len - 1, m_len - 1) = lat.at(t_len - 1, lat.blank);
  if (m_len > 1) b(t_len - 1, m_len - 2) = lat.at(t_len - 1, sym(m_len - 2));
  for (int64_t t = t_len - 2; t >= 0; --t) {
    for (int64_t m = m_len - 1; m >= 0; --m) {
      double acc = b(t + 1, m);
      if (m + 1 < m_len) acc = log_add(acc, b(t + 1, m + 1));
      if (m + 2 < m_len && m % 2 == 1 && sym(m) != sym(m + 2))
        acc = log_add(acc, b(t + 1, m + 2));
      b(t, m) = acc + lat.at(t, sym(m));
    }
  }

  // Occupancy: alpha and beta both carry the frame-t emission, so divide
  // it out once. d loss / d lp(t,k) = -sum_{m: sym(m)=k} occupancy(t,m).
  for (int64_t t = 0; t < t_len; ++t) {
    for (int64_t m = 0; m < m_len; ++m) {
      double av = a(t, m), bv = b(t, m);
      if (av == kLogZero || bv == kLogZero) continue;
      double occ = av + bv - lat.at(t, sym(m)) - log_p;
      res.grad.at(t, sym(m)) -= std::exp(occ);
    }
  }
  return res;
}

// Per-frame argmax (ties to the lowest unit ID), then collapse.
inline std::vector<int> ctc_greedy(const LogLattice& lat) {
  ST_REQUIRE(lat.frames > 0, "ctc_greedy: empty lattice");
  std::vector<int> path(static_cast<size_t>(lat.frames));
  for (int64_t t = 0; t < lat.frames; ++t) {
    int best = 0;
    for (int64_t k = 1; k < lat.num_units; ++k)
      if (lat.at(t, k) > lat.at(t, best)) best = static_cast<int>(k);
    path[static_cast<size_t>(t)] = best;
  }
  return collapse(path, lat.blank);
}

}  // namespace ctc
}  // namespace seqtrans

#endif  // SEQTRANS_CTC_HPP_
