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

#include "bvfl/model/layers.h"

#include "bvfl/common/error.h"

namespace bvfl {

std::size_t SelectHiddenWidth(std::size_t input_width, std::size_t scale) {
  if (input_width == 0 || scale == 0) {
    throw PreconditionError("hidden width selection needs positive inputs");
  }
  for (std::size_t c : {128u, 256u, 512u, 1024u}) {
    if (c >= input_width) return scale * c;
  }
  return scale * 1024;
}

BatchNormLayer::BatchNormLayer(std::string name, std::size_t width)
    : gamma(name + ".gamma", Tensor::Full({width}, 1.0)),
      beta(name + ".beta", Tensor::Zeros({width})),
      stats{Tensor::Zeros({width}), Tensor::Full({width}, 1.0)} {}

Var BatchNormLayer::Forward(ForwardContext& ctx, Var x) {
  Tape& tape = *ctx.tape;
  return ops::BatchNorm1d(x, tape.Bind(gamma), tape.Bind(beta), stats,
                          ctx.training);
}

BayesianFC::BayesianFC(const std::string& name, std::size_t input_width,
                       std::size_t hidden_layers, std::size_t scale,
                       std::size_t output_width, double dropout,
                       const PriorSpec& prior, CounterRng& init_rng,
                       std::size_t hidden_override)
    : hidden_width_(hidden_override ? hidden_override
                                    : SelectHiddenWidth(input_width, scale)),
      dropout_(dropout) {
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw PreconditionError("dropout must be in [0, 1)");
  }
  std::size_t in = input_width;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    const std::string prefix = name + ".l" + std::to_string(l);
    linears_.emplace_back(prefix, in, hidden_width_, prior, init_rng);
    norms_.emplace_back(prefix + ".bn", hidden_width_);
    in = hidden_width_;
  }
  linears_.emplace_back(name + ".out", in, output_width, prior, init_rng);
}

Var BayesianFC::Forward(ForwardContext& ctx, Var x) {
  for (std::size_t l = 0; l < norms_.size(); ++l) {
    x = ops::Relu(linears_[l].Forward(ctx, x));
    x = norms_[l].Forward(ctx, x);
    if (ctx.training && dropout_ > 0.0) {
      if (ctx.dropout_rng == nullptr) {
        throw ContractError("training forward needs a dropout stream");
      }
      x = ops::Dropout(x, dropout_, *ctx.dropout_rng, true);
    }
  }
  return linears_.back().Forward(ctx, x);
}

ParamList BayesianFC::parameters() {
  ParamList out;
  for (std::size_t l = 0; l < linears_.size(); ++l) {
    for (Parameter* p : linears_[l].parameters()) out.push_back(p);
    if (l < norms_.size()) {
      for (Parameter* p : norms_[l].parameters()) out.push_back(p);
    }
  }
  return out;
}

std::vector<BatchNormLayer*> BayesianFC::batch_norms() {
  std::vector<BatchNormLayer*> out;
  for (auto& n : norms_) out.push_back(&n);
  return out;
}

}  // namespace bvfl
