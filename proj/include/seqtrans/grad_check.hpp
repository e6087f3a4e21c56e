// seqtrans/grad_check.hpp
//
// Central-difference validation for analytic gradients.

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

#ifndef SEQTRANS_GRAD_CHECK_HPP_
#define SEQTRANS_GRAD_CHECK_HPP_

#include <cmath>
#include <functional>
#include <utility>

#include "seqtrans/tape.hpp"

namespace seqtrans {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         (std::abs(analytic) + std::abs(numeric) + 1e-12);
}

// Max relative error between a supplied analytic gradient and central
// differences of a plain scalar-valued function. Non-finite values at
// perturbed points surface as a non-finite error for that coordinate.
inline double grad_check_values(const std::function<double(const Tensor&)>& f,
                                const Tensor& point, const Tensor& analytic,
                                double step) {
  ST_REQUIRE(analytic.numel() == point.numel(), "grad_check: gradient shape mismatch");
  ST_REQUIRE(step >= 1e-7 && step <= 1e-3, "grad_check: step outside [1e-7, 1e-3]");
  double worst = 0.0;
  Tensor x = point;
  for (int64_t i = 0; i < x.numel(); ++i) {
    double keep = x.at(i);
    x.at(i) = keep + step;
    double fp = f(x);
    x.at(i) = keep - step;
    double fm = f(x);
    x.at(i) = keep;
    double numeric = (fp - fm) / (2.0 * step);
    double e = rel_err(analytic.at(i), numeric);
    if (!(e <= worst)) worst = e;  // keeps NaN from vanishing
  }
  return worst;
}

// Tape-recorded variant: f builds the forward computation from one input
// leaf and returns a scalar value. The analytic gradient comes from one
// backward sweep; differences re-run the forward on fresh tapes.
using TapeFn = std::function<Val(Tape&, Val)>;

inline double grad_check(const TapeFn& f, const Tensor& point, double step) {
  Tape tape;
  Val x = tape.input(point);
  Val out = f(tape, x);
  ST_REQUIRE(tape.value(out).numel() == 1, "grad_check: function must be scalar");
  tape.backward(out);
  Tensor analytic = tape.grad(x);
  auto eval = [&f](const Tensor& p) {
    Tape t;
    Val v = t.input(p);
    return t.value(f(t, v)).at(0);
  };
  return grad_check_values(eval, point, analytic, step);
}

}  // namespace seqtrans

#endif  // SEQTRANS_GRAD_CHECK_HPP_
