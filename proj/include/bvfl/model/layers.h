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

#ifndef BVFL_MODEL_LAYERS_H_
#define BVFL_MODEL_LAYERS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bvfl/autodiff/ops.h"
#include "bvfl/bayes/variational.h"

namespace bvfl {

// s * (smallest of {128, 256, 512, 1024} >= input), or s * 1024 above that.
std::size_t SelectHiddenWidth(std::size_t input_width, std::size_t scale);

// Deterministic affine batch normalization over the columns of N x D input.
class BatchNormLayer {
 public:
  BatchNormLayer(std::string name, std::size_t width);

  Var Forward(ForwardContext& ctx, Var x);
  ParamList parameters() { return {&gamma, &beta}; }

  Parameter gamma;
  Parameter beta;
  ops::BatchNormStats stats;
};

// Stack of [variational linear -> relu -> batch-norm -> dropout] blocks
// followed by a variational linear map to the output width.
class BayesianFC {
 public:
  // A nonzero `hidden_override` replaces the width selection rule.
  BayesianFC(const std::string& name, std::size_t input_width,
             std::size_t hidden_layers, std::size_t scale,
             std::size_t output_width, double dropout, const PriorSpec& prior,
             CounterRng& init_rng, std::size_t hidden_override = 0);

  Var Forward(ForwardContext& ctx, Var x);
  ParamList parameters();
  std::vector<BatchNormLayer*> batch_norms();
  std::size_t hidden_width() const { return hidden_width_; }

 private:
  std::size_t hidden_width_;
  double dropout_;
  std::vector<VariationalLinear> linears_;
  std::vector<BatchNormLayer> norms_;
};

}  // namespace bvfl

#endif  // BVFL_MODEL_LAYERS_H_
