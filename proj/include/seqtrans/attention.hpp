// seqtrans/attention.hpp
//
// Attention encoder-decoder scoring: content and location-aware energies,
// attention weights and context vectors, the recurrent decoder step,
// teacher-forced sequence loss, and label-synchronous beam search.

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

#ifndef SEQTRANS_ATTENTION_HPP_
#define SEQTRANS_ATTENTION_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "seqtrans/beam.hpp"
#include "seqtrans/rnn_cell.hpp"

namespace seqtrans {
namespace att {

struct AttentionParams {
  Tensor w;        // (A, 1) energy projection
  Tensor b;        // (A)
  Tensor w_dec;    // (Ddec, A) decoder-state projection
  Tensor v_enc;    // (Denc, A) encoder-state projection
  Tensor u_conv;   // (nf, A) convolution-feature projection, location only
  Tensor filters;  // (nf, width), empty for content-based

  bool location() const { return filters.numel() > 0; }

  static AttentionParams init(int64_t enc_dim, int64_t dec_dim, int64_t att_dim,
                              int64_t n_filters, int64_t filter_width, Rng* rng,
                              double scale) {
    AttentionParams p;
    p.w = rand_uniform({att_dim, 1}, rng, scale);
    p.b = rand_uniform({att_dim}, rng, scale);
    p.w_dec = rand_uniform({dec_dim, att_dim}, rng, scale);
    p.v_enc = rand_uniform({enc_dim, att_dim}, rng, scale);
    if (n_filters > 0) {
      p.u_conv = rand_uniform({n_filters, att_dim}, rng, scale);
      p.filters = rand_uniform({n_filters, filter_width}, rng, scale);
    }
    return p;
  }
};

struct AttentionRef {
  Val w, b, w_dec, v_enc, u_conv, filters;
  bool location = false;
};

inline AttentionRef bind(Binder& bind, AttentionParams& p) {
  AttentionRef r;
  r.w = bind(p.w);
  r.b = bind(p.b);
  r.w_dec = bind(p.w_dec);
  r.v_enc = bind(p.v_enc);
  r.location = p.location();
  if (r.location) {
    r.u_conv = bind(p.u_conv);
    r.filters = bind(p.filters);
  }
  return r;
}

// e_s = w^T tanh(W d_prev + V h_s + b), plus U (F * alpha_prev)_s for the
// location-aware variant. h is (S x Denc); the result is an S-vector.
inline Val energy(Tape* tape, const AttentionRef& p, Val d_prev, Val h,
                  std::optional<Val> alpha_prev) {
  Tape& t = *tape;
  ST_REQUIRE(p.location == alpha_prev.has_value(),
             "energy: previous alignment required iff location-based");
  Val base = t.add(t.add(t.affine(h, p.v_enc), t.affine(d_prev, p.w_dec)), p.b);
  if (p.location) {
    Val conv = t.conv1d_same(*alpha_prev, p.filters);  // S x nf
    base = t.add(base, t.affine(conv, p.u_conv));
  }
  int64_t s_len = t.value(h).shape[0];
  return t.reshape(t.affine(t.tanh(base), p.w), {s_len});
}

struct Attend {
  Val alpha;    // attention weights, S
  Val context;  // sum_s alpha_s h_s, Denc
};

inline Attend attend(Tape* tape, Val e, Val h) {
  Val alpha = tape->softmax(e);
  return Attend{alpha, tape->affine(alpha, h)};
}

// ---------------------------------------------------------------------------
// Decoder.
// ---------------------------------------------------------------------------

struct AttDecoderParams {
  Tensor embedding;  // (vocab, E)
  LstmCellParams cell;  // input E + Denc
  Tensor w_out;  // (H, vocab)
  Tensor b_out;  // (vocab)
  AttentionParams att;

  int64_t vocab() const { return embedding.shape[0]; }

  static AttDecoderParams init(int64_t vocab, int64_t embed_dim, int64_t enc_dim,
                               int64_t hidden, int64_t att_dim, int64_t n_filters,
                               int64_t filter_width, Rng* rng, double scale) {
    AttDecoderParams p;
    p.embedding = rand_uniform({vocab, embed_dim}, rng, scale);
    p.cell = LstmCellParams::init(embed_dim + enc_dim, hidden, rng, scale);
    p.w_out = rand_uniform({hidden, vocab}, rng, scale);
    p.b_out = rand_uniform({vocab}, rng, scale);
    p.att = AttentionParams::init(enc_dim, hidden, att_dim, n_filters,
                                  filter_width, rng, scale);
    return p;
  }
};

struct AttDecoderRef {
  Val embedding, w_out, b_out;
  LstmCellRef cell;
  AttentionRef att;
  int64_t vocab = 0;
};

inline AttDecoderRef bind(Binder& b, AttDecoderParams& p) {
  AttDecoderRef r;
  r.embedding = b(p.embedding);
  r.cell = bind(b, p.cell);
  r.w_out = b(p.w_out);
  r.b_out = b(p.b_out);
  r.att = bind(b, p.att);
  r.vocab = p.vocab();
  return r;
}

// d (the cell state pair) plus the previous attention weights.
struct DecoderState {
  LstmState cell;
  Val alpha;
};

// Initial state: zero hidden vectors, uniform alignment over S frames.
inline DecoderState decoder_initial(Tape* tape, const AttDecoderRef& p, int64_t s_len) {
  DecoderState st;
  st.cell = lstm_initial(tape, p.cell.hidden);
  st.alpha = tape->input(Tensor::full({s_len}, 1.0 / static_cast<double>(s_len)));
  return st;
}

struct DecoderStepOut {
  Val log_probs;  // log-distribution over the vocabulary
  DecoderState state;
};

// One recurrence: the cell consumes [embedding(prev_label); context] and the
// output head is a log-softmax over units. alpha_used is stored in the next
// state for the following step's location features.
inline DecoderStepOut decoder_step(Tape* tape, const AttDecoderRef& p,
                                   int prev_label, const DecoderState& state,
                                   Val context, Val alpha_used) {
  Tape& t = *tape;
  int64_t e_dim = t.value(p.embedding).shape[1];
  Val emb = t.gather(p.embedding, [&] {
    std::vector<int64_t> idx(static_cast<size_t>(e_dim));
    for (int64_t i = 0; i < e_dim; ++i) idx[static_cast<size_t>(i)] = prev_label * e_dim + i;
    return idx;
  }());
  Val x = t.concat({emb, context});
  LstmState cell = lstm_step(&t, p.cell, x, state.cell);
  Val logits = t.affine(cell.h, p.w_out, p.b_out);
  return DecoderStepOut{t.log_softmax(logits), DecoderState{cell, alpha_used}};
}

// Energy + attend + decoder step, the unit of both loss and search.
inline DecoderStepOut full_step(Tape* tape, const AttDecoderRef& p, int prev_label,
                                const DecoderState& state, Val h) {
  std::optional<Val> aprev;
  if (p.att.location) aprev = state.alpha;
  Val e = energy(tape, p.att, state.cell.h, h, aprev);
  Attend at = attend(tape, e, h);
  return decoder_step(tape, p, prev_label, state, at.context, at.alpha);
}

// Teacher-forced sequence loss: -sum_l ln p(y_l | y_<l, X). The target must
// end with eos; gradients flow to all decoder parameters and to h.
inline Val attention_seq_loss(Tape* tape, const AttDecoderRef& p, Val h,
                              const std::vector<int>& target_with_eos, int bos_id) {
  ST_REQUIRE(!target_with_eos.empty(), "attention_seq_loss: empty target");
  Tape& t = *tape;
  int64_t s_len = t.value(h).shape[0];
  DecoderState state = decoder_initial(&t, p, s_len);
  Val loss = t.constant(0.0);
  int prev = bos_id;
  for (int gold : target_with_eos) {
    DecoderStepOut out = full_step(&t, p, prev, state, h);
    Val lp = t.gather(out.log_probs, {gold});
    loss = t.add(loss, lp);
    state = out.state;
    prev = gold;
  }
  return t.mul(loss, t.constant(-1.0));
}

// ---------------------------------------------------------------------------
// Label-synchronous beam search.
// ---------------------------------------------------------------------------

struct AttBeamOptions {
  int beam = 30;
  int max_len = 200;
  int bos_id = 0;
  int eos_id = 0;
  std::vector<int> emit_units;  // expandable units (eos excluded)
  const UnitScorer* lm = nullptr;
  double beta = 0.0;
};

// Hypotheses end on eos; ones reaching max_len are finalized as-is and
// flagged. No coverage or length-control terms.
inline std::vector<Hypothesis> attention_beam(Tape* tape, const AttDecoderRef& p,
                                              Val h, const AttBeamOptions& opt) {
  ST_REQUIRE(opt.beam >= 1 && opt.max_len >= 1, "attention_beam: bad options");
  const bool use_lm = (opt.lm != nullptr && opt.beta != 0.0);
  Tape& t = *tape;
  int64_t s_len = t.value(h).shape[0];

  struct Live {
    Hypothesis hyp;
    DecoderState state;
    LMState lm_state;
  };
  std::vector<Live> live;
  live.push_back(Live{Hypothesis{}, decoder_initial(&t, p, s_len),
                      use_lm ? opt.lm->start() : LMState{}});
  std::vector<Hypothesis> finished;

  for (int step = 0; step < opt.max_len && !live.empty(); ++step) {
    struct Cand {
      Hypothesis hyp;
      DecoderState state;
      LMState lm_state;
      bool is_eos;
    };
    std::vector<Cand> cands;
    for (Live& l : live) {
      int prev = l.hyp.labels.empty() ? opt.bos_id : l.hyp.labels.back();
      DecoderStepOut out = full_step(&t, p, prev, l.state, h);
      const Tensor& lp = t.value(out.log_probs);
      auto push = [&](int k, bool is_eos) {
        Cand c;
        c.hyp = l.hyp;
        if (!is_eos) c.hyp.labels.push_back(k);  // eos never reported
        c.hyp.model_score = l.hyp.model_score + lp.at(k);
        c.lm_state = l.lm_state;
        c.hyp.lm_score = l.hyp.lm_score;
        if (use_lm) {
          if (is_eos) {
            c.hyp.lm_score += opt.lm->end(l.lm_state);
          } else {
            auto [lms, st] = opt.lm->score(l.lm_state, k);
            c.hyp.lm_score += lms;
            c.lm_state = std::move(st);
          }
        }
        c.hyp.score = c.hyp.model_score + (use_lm ? opt.beta * c.hyp.lm_score : 0.0);
        c.state = out.state;
        c.is_eos = is_eos;
        cands.push_back(std::move(c));
      };
      for (int k : opt.emit_units) push(k, false);
      push(opt.eos_id, true);
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return hyp_better(a.hyp, b.hyp); });
    if (cands.size() > static_cast<size_t>(opt.beam)) cands.resize(static_cast<size_t>(opt.beam));
    live.clear();
    for (Cand& c : cands) {
      if (c.is_eos) {
        finished.push_back(std::move(c.hyp));
      } else if (step + 1 == opt.max_len) {
        c.hyp.truncated = true;
        finished.push_back(std::move(c.hyp));
      } else {
        live.push_back(Live{std::move(c.hyp), c.state, std::move(c.lm_state)});
      }
    }
  }
  sort_nbest(&finished);
  if (finished.size() > static_cast<size_t>(opt.beam))
    finished.resize(static_cast<size_t>(opt.beam));
  return finished;
}

}  // namespace att
}  // namespace seqtrans

#endif  // SEQTRANS_ATTENTION_HPP_
