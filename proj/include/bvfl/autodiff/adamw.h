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

#ifndef BVFL_AUTODIFF_ADAMW_H_
#define BVFL_AUTODIFF_ADAMW_H_

#include "bvfl/autodiff/parameter.h"
#include "bvfl/autodiff/tape.h"
#include "bvfl/autodiff/tensor.h"

namespace bvfl {

// One AdamW update: bias-corrected Adam moments followed by decoupled weight
// decay,
//   param <- param - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * param.
// Moments are lazily created on the first step.
void AdamWStep(Tensor& param, const Tensor& grad, AdamWState& state,
               const AdamWConfig& config);

// Applies AdamWStep to every parameter bound on `tape`, using its gradient
// from `grads` (zeros if the parameter was bound but not reached).
// Parameters never bound on the tape are left untouched.
void ApplyAdamW(const ParamList& params, const Tape& tape,
                const Gradients& grads, const AdamWConfig& config);

}  // namespace bvfl

#endif  // BVFL_AUTODIFF_ADAMW_H_
