// seqtrans/rnn_cell.hpp
//
// Single-layer LSTM-style gated cell, the recurrent unit shared by the
// encoder, the attention decoder, and the transducer prediction network.

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

#ifndef SEQTRANS_RNN_CELL_HPP_
#define SEQTRANS_RNN_CELL_HPP_

#include "seqtrans/params.hpp"

namespace seqtrans {

struct LstmCellParams {
  Tensor w_x;   // (input_dim, 4*hidden), gate order i f g o
  Tensor w_h;   // (hidden, 4*hidden)
  Tensor bias;  // (4*hidden)

  int64_t hidden() const { return w_h.shape[0]; }
  int64_t input_dim() const { return w_x.shape[0]; }

  static LstmCellParams init(int64_t input_dim, int64_t hidden, Rng* rng,
                             double scale) {
    LstmCellParams p;
    p.w_x = rand_uniform({input_dim, 4 * hidden}, rng, scale);
    p.w_h = rand_uniform({hidden, 4 * hidden}, rng, scale);
    p.bias = rand_uniform({4 * hidden}, rng, scale);
    return p;
  }
};

struct LstmCellRef {
  Val w_x, w_h, bias;
  int64_t hidden = 0;
};

inline LstmCellRef bind(Binder& b, LstmCellParams& p) {
  return LstmCellRef{b(p.w_x), b(p.w_h), b(p.bias), p.hidden()};
}

struct LstmState {
  Val h, c;
};

inline LstmState lstm_initial(Tape* tape, int64_t hidden) {
  Val z = tape->input(Tensor::zeros({hidden}));
  return LstmState{z, z};
}

inline LstmState lstm_step(Tape* tape, const LstmCellRef& p, Val x,
                           const LstmState& prev) {
  Tape& t = *tape;
  Val gates = t.add(t.affine(x, p.w_x, p.bias), t.affine(prev.h, p.w_h));
  int64_t h = p.hidden;
  Val gi = t.sigmoid(t.slice(gates, 0, h));
  Val gf = t.sigmoid(t.slice(gates, h, h));
  Val gg = t.tanh(t.slice(gates, 2 * h, h));
  Val go = t.sigmoid(t.slice(gates, 3 * h, h));
  Val c = t.add(t.mul(gf, prev.c), t.mul(gi, gg));
  Val hidden = t.mul(go, t.tanh(c));
  return LstmState{hidden, c};
}

}  // namespace seqtrans

#endif  // SEQTRANS_RNN_CELL_HPP_
