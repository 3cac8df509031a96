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
#ifndef BVFL_BAYES_KL_H_
#define BVFL_BAYES_KL_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "bvfl/autodiff/tensor.h"
#include "bvfl/bayes/variational.h"
#include "bvfl/common/rng.h"

namespace bvfl {

// KL(N(mu, sigma^2) || N(mu0, sigma0^2)).
double KlGaussian(double mu, double sigma, double mu0, double sigma0);

// Closed-form KL of a layer's full posterior against a Gaussian prior.
double LayerKlGaussian(const VariationalLinear& layer,
                       const GaussianPrior& prior);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// (1/S) sum_s [log q(w_s) - log p(w_s)] over all weights and biases of the
// layer, with w_s drawn by reparameterization from `rng`.
MonteCarloEstimate KlSpikeSlabMc(const VariationalLinear& layer,
                                 std::size_t samples, CounterRng& rng);

// Runs `forward` m times; successive draws continue the same stream.
std::vector<Tensor> PosteriorPredict(
    const std::function<Tensor(CounterRng&)>& forward, std::size_t draws,
    CounterRng& rng);

}  // namespace bvfl

#endif  // BVFL_BAYES_KL_H_
