// seqtrans/beam.hpp
//
// Decode-time plumbing shared by every search: the n-best hypothesis type,
// the fixed tie-breaking order, and the fusion-scorer interface an external
// language model plugs into.

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

#ifndef SEQTRANS_BEAM_HPP_
#define SEQTRANS_BEAM_HPP_

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "seqtrans/common.hpp"

namespace seqtrans {

struct Hypothesis {
  std::vector<int> labels;
  double score = 0.0;        // ranking score: model + beta * lm
  double model_score = 0.0;  // model component alone
  double lm_score = 0.0;     // unweighted LM component
  bool truncated = false;    // hit max_len without a proper end
};

// Fixed order everywhere: higher score first, then shorter prefix, then
// lexicographically smaller label sequence. Makes every decode bit-reproducible.
inline bool hyp_better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.labels.size() != b.labels.size()) return a.labels.size() < b.labels.size();
  return a.labels < b.labels;
}

inline void sort_nbest(std::vector<Hypothesis>* hyps) {
  std::stable_sort(hyps->begin(), hyps->end(), hyp_better);
}

// Decoding-time LM state. The same small value type serves the plain n-gram
// scorer (history only) and the multi-level word/character scorer.
struct LMState {
  std::vector<std::string> history;       // last (order-1) tokens
  std::vector<std::string> word_history;  // multi-level mode
  double acc_char = 0.0;                  // in-word character score so far
  std::string pending;                    // word buffer (multi-level mode)
};

// Autoregressive scorer over unit IDs, fused into beam search. Pure: the
// returned state is the only carried context, so equal label prefixes always
// produce equal states (required for hypothesis merging).
class UnitScorer {
 public:
  virtual ~UnitScorer() = default;
  virtual LMState start() const = 0;
  virtual std::pair<double, LMState> score(const LMState& state, int unit_id) const = 0;
  // Terminal contribution at hypothesis end (eos for label-synchronous
  // decoders, pending-word flush for the multi-level scorer).
  virtual double end(const LMState& state) const = 0;
};

}  // namespace seqtrans

#endif  // SEQTRANS_BEAM_HPP_
