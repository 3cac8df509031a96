//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bvfl/autodiff/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

double Evaluate(const TapeFunction& fn, const Tensor& x) {
  Tape tape(/*record=*/false);
  Var out = fn(tape.Leaf(x, false));
  const double v = out.value().item();
  if (!std::isfinite(v)) {
    throw NumericError("gradient check: function is non-finite at a probe");
  }
  return v;
}

}  // namespace

GradCheckResult CheckGradient(const TapeFunction& fn, const Tensor& point,
                              double step) {
  if (!(step > 0.0)) throw PreconditionError("gradient check step must be > 0");
  Tape tape;
  Var x = tape.Leaf(point);
  Var y = fn(x);
  Tensor analytic = tape.Backward(y).Get(x);
  const double f0 = y.value().item();

  GradCheckResult result;
  // Disagreement between one-sided slopes beyond what curvature explains.
  const double kink_scale = std::max(1e-5, 1e3 * step);
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = Evaluate(fn, probe);
    probe[i] = orig - step;
    const double fm = Evaluate(fn, probe);
    probe[i] = orig;

    const double central = (fp - fm) / (2.0 * step);
    const double forward = (fp - f0) / step;
    const double backward = (f0 - fm) / step;
    if (std::abs(forward - backward) >
        kink_scale * std::max(1.0, std::abs(central))) {
      result.nonsmooth.push_back(i);
      continue;
    }
    const double err =
        std::abs(analytic[i] - central) / std::max(1.0, std::abs(analytic[i]));
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace bvfl
