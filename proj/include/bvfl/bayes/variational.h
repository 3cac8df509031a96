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

#ifndef BVFL_BAYES_VARIATIONAL_H_
#define BVFL_BAYES_VARIATIONAL_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bvfl/autodiff/parameter.h"
#include "bvfl/autodiff/tape.h"
#include "bvfl/bayes/prior.h"
#include "bvfl/common/rng.h"

namespace bvfl {

enum class WeightMode {
  kSample,  // draw weights from the posterior on every forward call
  kMean,    // use posterior means only (deterministic ablation)
};

// Per-call state threaded through a model's forward pass.
struct ForwardContext {
  Tape* tape = nullptr;
  WeightMode mode = WeightMode::kSample;
  // Enables dropout and batch statistics in batch-norm.
  bool training = true;
  CounterRng* weight_rng = nullptr;
  CounterRng* dropout_rng = nullptr;
  // When set, sampled Bayesian layers append their KL contribution here.
  std::vector<Var>* kl_terms = nullptr;
};

// Initial value of the pre-softplus scale parameters (std ~ 6.7e-3).
inline constexpr double kInitialRho = -5.0;

double Softplus(double x);

// Fused reparameterized sample W = mu + softplus(rho) * eps.
Var Reparameterize(Var mu, Var rho, const Tensor& eps);

// Closed-form KL(N(mu, softplus(rho)^2) || prior) summed over elements.
Var GaussianKlSum(Var mu, Var rho, const GaussianPrior& prior);

// Single-sample estimate sum_i [log q(w_i) - log p(w_i)] at
// w = mu + softplus(rho) * eps. Gradients flow through the
// reparameterization.
Var SpikeSlabKlSample(Var mu, Var rho, const Tensor& eps,
                      const SpikeSlabPrior& prior);

// Mean-field Gaussian linear layer y = x W + b with W, b drawn from the
// variational posterior. Weight tensors are stored input-major (in x out).
class VariationalLinear {
 public:
  VariationalLinear(std::string name, std::size_t in, std::size_t out,
                    PriorSpec prior, CounterRng& init_rng);

  struct Weights {
    Var weight;
    Var bias;
  };
  // Concrete weights for one forward call. In sample mode the KL of this
  // draw is appended to ctx.kl_terms.
  Weights SampleWeights(ForwardContext& ctx);
  // Same, with the noise supplied by the caller (eps shapes must match).
  Weights SampleWeights(ForwardContext& ctx, const Tensor& weight_eps,
                        const Tensor& bias_eps);

  Var Forward(ForwardContext& ctx, Var x);

  ParamList parameters();
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  const PriorSpec& prior() const { return prior_; }
  const std::string& name() const { return name_; }

  Parameter weight_mu;
  Parameter weight_rho;
  Parameter bias_mu;
  Parameter bias_rho;

 private:
  std::string name_;
  std::size_t in_;
  std::size_t out_;
  PriorSpec prior_;
};

// Variational embedding table: one d-wide Gaussian vector per category.
class BayesianEmbedding {
 public:
  BayesianEmbedding(std::string name, std::size_t vocab, std::size_t width,
                    PriorSpec prior, CounterRng& init_rng);

  // Looks up one row per index; an index >= vocab is a PreconditionError.
  Var Forward(ForwardContext& ctx, std::span<const std::size_t> indices);

  ParamList parameters();
  std::size_t vocab() const { return vocab_; }
  std::size_t width() const { return width_; }

  Parameter mu;
  Parameter rho;

 private:
  std::string name_;
  std::size_t vocab_;
  std::size_t width_;
  PriorSpec prior_;
};

// Appends the KL term for (mu, rho) under `prior` given the draw `eps`.
void AppendKl(ForwardContext& ctx, Var mu, Var rho, const Tensor& eps,
              const PriorSpec& prior);

// Tensor of i.i.d. standard normals.
Tensor NormalTensor(const Shape& shape, CounterRng& rng);

}  // namespace bvfl

#endif  // BVFL_BAYES_VARIATIONAL_H_
