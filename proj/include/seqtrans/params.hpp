// seqtrans/params.hpp
//
// Parameter plumbing: binding model tensors into a tape while remembering
// the (tensor, value) pairs for the optimizer, plus init helpers.

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

#ifndef SEQTRANS_PARAMS_HPP_
#define SEQTRANS_PARAMS_HPP_

#include <utility>
#include <vector>

#include "seqtrans/tape.hpp"

namespace seqtrans {

inline Tensor rand_uniform(std::vector<int64_t> shape, Rng* rng, double scale) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng->uniform(-scale, scale);
  return t;
}

struct ParamBind {
  Tensor* tensor;
  Val val;
};

// Feeds parameters into a tape as input leaves and records which leaf holds
// which tensor, so the training loop can read gradients back. Virtual so a
// harness can substitute where values come from (e.g. slices of one flat
// tensor when gradient-checking a whole model).
class Binder {
 public:
  explicit Binder(Tape* tape) : tape_(tape) {}
  virtual ~Binder() = default;

  virtual Val operator()(Tensor& t) {
    Val v = tape_->input(t);
    binds_.push_back({&t, v});
    return v;
  }

  Tape& tape() { return *tape_; }
  const std::vector<ParamBind>& binds() const { return binds_; }

 protected:
  std::vector<ParamBind> binds_;

 private:
  Tape* tape_;
};

}  // namespace seqtrans

#endif  // SEQTRANS_PARAMS_HPP_
