// tests/test_util.hpp
//
// Shared test plumbing: packing a model's parameters into one flat tensor
// and rebinding them from it, so whole models can be gradient-checked
// through the standard grad_check harness.

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

#ifndef SEQTRANS_TESTS_TEST_UTIL_HPP_
#define SEQTRANS_TESTS_TEST_UTIL_HPP_

#include <vector>

#include "seqtrans/params.hpp"

namespace seqtrans {
namespace testing {

// Binds parameters as consecutive slices of one flat input value instead of
// fresh leaves. Visit order must match the packing order (both use the same
// module bind() functions, so it does).
class FlatBinder : public Binder {
 public:
  FlatBinder(Tape* tape, Val flat) : Binder(tape), flat_(flat) {}

  Val operator()(Tensor& t) override {
    Val v = tape().reshape(tape().slice(flat_, off_, t.numel()), t.shape);
    off_ += t.numel();
    binds_.push_back({&t, v});
    return v;
  }

 private:
  Val flat_;
  int64_t off_ = 0;
};

// Flattens every tensor a model's bind() visits, in visit order.
template <typename Params, typename BindFn>
Tensor pack_params(Params& params, const BindFn& bind_fn) {
  Tape dummy;
  Binder b(&dummy);
  bind_fn(b, params);
  std::vector<double> flat;
  for (const ParamBind& pb : b.binds())
    flat.insert(flat.end(), pb.tensor->data.begin(), pb.tensor->data.end());
  return Tensor::vector(std::move(flat));
}

}  // namespace testing
}  // namespace seqtrans

#endif  // SEQTRANS_TESTS_TEST_UTIL_HPP_
