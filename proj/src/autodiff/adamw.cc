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

#include "bvfl/autodiff/adamw.h"

#include <cmath>

#include "bvfl/common/error.h"

namespace bvfl {

void AdamWStep(Tensor& param, const Tensor& grad, AdamWState& state,
               const AdamWConfig& config) {
  if (!param.SameShape(grad)) {
    throw DimensionError("adamw: gradient shape " +
                         ShapeToString(grad.shape()) + " vs parameter " +
                         ShapeToString(param.shape()));
  }
  if (!grad.AllFinite()) throw NumericError("adamw: non-finite gradient");
  if (state.step == 0) {
    state.m = Tensor::Zeros(param.shape());
    state.v = Tensor::Zeros(param.shape());
  } else if (!state.m.SameShape(param) || !state.v.SameShape(param)) {
    throw DimensionError("adamw: optimizer state shape mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.learning_rate;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    const double old = param[i];
    param[i] = old - lr * m_hat / (std::sqrt(v_hat) + config.epsilon) -
               lr * config.weight_decay * old;
  }
}

void ApplyAdamW(const ParamList& params, const Tape& tape,
                const Gradients& grads, const AdamWConfig& config) {
  for (Parameter* p : params) {
    const Var* v = tape.BoundVar(*p);
    if (v == nullptr) continue;
    if (const Tensor* g = grads.Find(*v)) {
      AdamWStep(p->value, *g, p->adam, config);
    } else {
      AdamWStep(p->value, Tensor::Zeros(p->value.shape()), p->adam, config);
    }
  }
}

}  // namespace bvfl
