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
#include "bvfl/bayes/kl.h"

#include <cmath>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

double KlGaussian(double mu, double sigma, double mu0, double sigma0) {
  if (!(sigma > 0) || !(sigma0 > 0)) {
    throw PreconditionError("KL requires positive standard deviations");
  }
  const double d = mu - mu0;
  return std::log(sigma0 / sigma) +
         (sigma * sigma + d * d) / (2.0 * sigma0 * sigma0) - 0.5;
}

double LayerKlGaussian(const VariationalLinear& layer,
                       const GaussianPrior& prior) {
  double kl = 0.0;
  auto add = [&](const Parameter& mu, const Parameter& rho) {
    for (std::size_t i = 0; i < mu.value.size(); ++i) {
      kl += KlGaussian(mu.value[i], Softplus(rho.value[i]), prior.mean,
                       prior.stddev);
    }
  };
  add(layer.weight_mu, layer.weight_rho);
  add(layer.bias_mu, layer.bias_rho);
  return kl;
}

MonteCarloEstimate KlSpikeSlabMc(const VariationalLinear& layer,
                                 std::size_t samples, CounterRng& rng) {
  if (samples == 0) throw PreconditionError("KL estimate needs S >= 1");
  const PriorSpec& prior = layer.prior();
  std::vector<double> mus, sigmas;
  auto collect = [&](const Parameter& mu, const Parameter& rho) {
    for (std::size_t i = 0; i < mu.value.size(); ++i) {
      mus.push_back(mu.value[i]);
      sigmas.push_back(Softplus(rho.value[i]));
    }
  };
  collect(layer.weight_mu, layer.weight_rho);
  collect(layer.bias_mu, layer.bias_rho);

  // Welford accumulation over samples.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double term = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      const double eps = rng.Normal();
      const double w = mus[i] + sigmas[i] * eps;
      const double log_q = -std::log(sigmas[i]) - 0.5 * eps * eps - kHalfLog2Pi;
      term += log_q - PriorLogDensity(prior, w);
    }
    const double delta = term - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (term - mean);
  }
  const double n = static_cast<double>(samples);
  MonteCarloEstimate out;
  out.mean = mean;
  if (samples > 1) out.std_error = std::sqrt(m2 / (n - 1) / n);
  return out;
}

std::vector<Tensor> PosteriorPredict(
    const std::function<Tensor(CounterRng&)>& forward, std::size_t draws,
    CounterRng& rng) {
  if (draws == 0) throw PreconditionError("posterior_predict needs m >= 1");
  std::vector<Tensor> out;
  out.reserve(draws);
  for (std::size_t m = 0; m < draws; ++m) {
    out.push_back(forward(rng));
  }
  return out;
}

}  // namespace bvfl
