// seqtrans/ctc_prefix.hpp
//
// Incremental CTC prefix probabilities (the alpha_ctc of joint decoding) and
// frame-synchronous prefix beam search with optional shallow LM fusion.

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

#ifndef SEQTRANS_CTC_PREFIX_HPP_
#define SEQTRANS_CTC_PREFIX_HPP_

#include <map>
#include <utility>
#include <vector>

#include "seqtrans/beam.hpp"
#include "seqtrans/ctc.hpp"

namespace seqtrans {
namespace ctc {

// Forward probabilities of one label prefix over all frames, split by
// whether the consuming path ends in blank or in the prefix's last label.
struct PrefixScoreState {
  std::vector<double> r_blank;     // per frame, log domain
  std::vector<double> r_nonblank;  // per frame, log domain
  int last_label = -1;             // -1 for the empty prefix
  double prefix_logp = 0.0;        // log P(collapsed output begins with prefix)
};

inline PrefixScoreState ctc_prefix_initial(const LogLattice& lat) {
  PrefixScoreState s;
  s.r_blank.resize(static_cast<size_t>(lat.frames));
  s.r_nonblank.assign(static_cast<size_t>(lat.frames), kLogZero);
  double acc = 0.0;
  for (int64_t t = 0; t < lat.frames; ++t) {
    acc += lat.at(t, lat.blank);
    s.r_blank[static_cast<size_t>(t)] = acc;
  }
  return s;
}

// Extends the prefix by one non-blank label. Returns the log prefix
// probability of the extended hypothesis (summed over all completions)
// together with the state needed to extend it further.
inline std::pair<double, PrefixScoreState> ctc_prefix_score_step(
    const PrefixScoreState& state, int label, const LogLattice& lat) {
  ST_REQUIRE(label != lat.blank, "prefix step: label must be non-blank");
  ST_REQUIRE(label >= 0 && label < lat.num_units, "prefix step: label out of range");
  const int64_t t_len = lat.frames;
  const bool from_empty = (state.last_label < 0);
  PrefixScoreState next;
  next.last_label = label;
  next.r_blank.assign(static_cast<size_t>(t_len), kLogZero);
  next.r_nonblank.assign(static_cast<size_t>(t_len), kLogZero);

  double psi = kLogZero;
  double rb_prev = kLogZero, rnb_prev = kLogZero;  // extended prefix at t-1
  for (int64_t t = 0; t < t_len; ++t) {
    // Paths of the parent prefix that may start this label at frame t:
    // blank-ending always; nonblank-ending only when the label changes.
    double phi_prev;
    if (t == 0) {
      phi_prev = from_empty ? 0.0 : kLogZero;
    } else {
      size_t i = static_cast<size_t>(t - 1);
      phi_prev = state.r_blank[i];
      if (state.last_label != label)
        phi_prev = log_add(phi_prev, state.r_nonblank[i]);
    }
    double emit = lat.at(t, label);
    double rnb = log_add(rnb_prev, phi_prev) + emit;
    double rb = (t == 0) ? kLogZero
                         : log_add(rb_prev, rnb_prev) + lat.at(t, lat.blank);
    psi = log_add(psi, phi_prev + emit);
    next.r_nonblank[static_cast<size_t>(t)] = rnb;
    next.r_blank[static_cast<size_t>(t)] = rb;
    rb_prev = rb;
    rnb_prev = rnb;
  }
  next.prefix_logp = psi;
  return {psi, next};
}

// log P(collapsed output == prefix): all frames consumed, no completion.
inline double ctc_full_sequence_score(const PrefixScoreState& state) {
  if (state.r_blank.empty()) return kLogZero;
  size_t last = state.r_blank.size() - 1;
  if (state.last_label < 0)  // empty prefix: every frame blank
    return state.r_blank[last];
  return log_add(state.r_blank[last], state.r_nonblank[last]);
}

// ---------------------------------------------------------------------------
// Prefix beam search.
// ---------------------------------------------------------------------------

// Frame-synchronous beam over collapsed prefixes, each carrying (ending-in-
// blank, ending-in-nonblank) forward mass. An optional LM is fused on label
// extensions; beta == 0 or a null scorer decodes identically to LM-free.
inline std::vector<Hypothesis> ctc_prefix_beam(const LogLattice& lat, int beam,
                                               const UnitScorer* lm = nullptr,
                                               double beta = 0.0) {
  ST_REQUIRE(beam >= 1, "ctc_prefix_beam: beam must be >= 1");
  ST_REQUIRE(lat.frames > 0, "ctc_prefix_beam: empty lattice");
  const bool use_lm = (lm != nullptr && beta != 0.0);

  struct Entry {
    double pb = kLogZero;   // prefix mass ending in blank
    double pnb = kLogZero;  // prefix mass ending in nonblank
    double lm_score = 0.0;
    LMState lm_state;
    double total() const { return log_add(pb, pnb); }
  };
  using Beams = std::map<std::vector<int>, Entry>;

  Beams beams;
  Entry init;
  init.pb = 0.0;
  if (use_lm) init.lm_state = lm->start();
  beams.emplace(std::vector<int>{}, init);

  for (int64_t t = 0; t < lat.frames; ++t) {
    Beams next;
    for (const auto& [prefix, entry] : beams) {
      double p_tot = entry.total();
      // Blank keeps the prefix.
      {
        Entry& e = next[prefix];
        if (e.pb == kLogZero && e.pnb == kLogZero) {
          e.lm_score = entry.lm_score;
          e.lm_state = entry.lm_state;
        }
        e.pb = log_add(e.pb, p_tot + lat.at(t, lat.blank));
      }
      // Repeating the last label keeps the prefix (extends the run).
      if (!prefix.empty()) {
        Entry& e = next[prefix];
        e.pnb = log_add(e.pnb, entry.pnb + lat.at(t, prefix.back()));
      }
      // Extensions by each non-blank unit.
      for (int k = 0; k < lat.num_units; ++k) {
        if (k == lat.blank) continue;
        double src = (!prefix.empty() && k == prefix.back()) ? entry.pb : p_tot;
        if (src == kLogZero) continue;
        std::vector<int> child = prefix;
        child.push_back(k);
        auto it = next.find(child);
        if (it == next.end()) {
          Entry e;
          if (use_lm) {
            auto [lp, st] = lm->score(entry.lm_state, k);
            e.lm_score = entry.lm_score + lp;
            e.lm_state = std::move(st);
          }
          it = next.emplace(std::move(child), std::move(e)).first;
        }
        it->second.pnb = log_add(it->second.pnb, src + lat.at(t, k));
      }
    }
    // Prune to the beam, ranking with fused scores.
    std::vector<Hypothesis> ranked;
    ranked.reserve(next.size());
    for (const auto& [prefix, entry] : next) {
      Hypothesis h;
      h.labels = prefix;
      h.model_score = entry.total();
      h.lm_score = entry.lm_score;
      h.score = h.model_score + (use_lm ? beta * entry.lm_score : 0.0);
      ranked.push_back(std::move(h));
    }
    sort_nbest(&ranked);
    Beams pruned;
    for (size_t i = 0; i < ranked.size() && i < static_cast<size_t>(beam); ++i)
      pruned.emplace(ranked[i].labels, next[ranked[i].labels]);
    beams = std::move(pruned);
  }

  std::vector<Hypothesis> out;
  out.reserve(beams.size());
  for (const auto& [prefix, entry] : beams) {
    Hypothesis h;
    h.labels = prefix;
    h.model_score = entry.total();
    h.lm_score = entry.lm_score + (use_lm ? lm->end(entry.lm_state) : 0.0);
    h.score = h.model_score + (use_lm ? beta * h.lm_score : 0.0);
    out.push_back(std::move(h));
  }
  sort_nbest(&out);
  return out;
}

}  // namespace ctc
}  // namespace seqtrans

#endif  // SEQTRANS_CTC_PREFIX_HPP_
