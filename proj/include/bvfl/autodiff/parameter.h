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

#ifndef BVFL_AUTODIFF_PARAMETER_H_
#define BVFL_AUTODIFF_PARAMETER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bvfl/autodiff/tensor.h"

namespace bvfl {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  Tensor m;
  Tensor v;
  std::int64_t step = 0;
};

// A named trainable tensor together with its optimizer state.
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Tensor init)
      : name(std::move(n)), value(std::move(init)) {}

  std::string name;
  Tensor value;
  AdamWState adam;
};

// Non-owning list of parameters, as returned by modules.
using ParamList = std::vector<Parameter*>;

}  // namespace bvfl

#endif  // BVFL_AUTODIFF_PARAMETER_H_
