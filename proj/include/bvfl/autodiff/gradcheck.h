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

#ifndef BVFL_AUTODIFF_GRADCHECK_H_
#define BVFL_AUTODIFF_GRADCHECK_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "bvfl/autodiff/tape.h"
#include "bvfl/autodiff/tensor.h"

namespace bvfl {

// A scalar-valued function built on the tape of its argument.
using TapeFunction = std::function<Var(Var)>;

struct GradCheckResult {
  // max over smooth coordinates of |analytic - numeric| / max(1, |analytic|)
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  // Coordinates where the one-sided differences disagree (kinks); these are
  // excluded from the error.
  std::vector<std::size_t> nonsmooth;
};

// Compares reverse-mode gradients of `fn` at `point` against central
// differences with the given step.
GradCheckResult CheckGradient(const TapeFunction& fn, const Tensor& point,
                              double step);

}  // namespace bvfl

#endif  // BVFL_AUTODIFF_GRADCHECK_H_
