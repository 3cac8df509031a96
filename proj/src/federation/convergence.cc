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


#include "bvfl/federation/convergence.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bvfl/common/error.h"
#include "bvfl/common/rng.h"

namespace bvfl {
namespace {

constexpr std::string_view kStreamConvInit = "conv-init";
constexpr std::string_view kStreamConvNoise = "conv-noise";

}  // namespace

void ConvergenceToy::Validate() const {
  if (!(alpha > 0) || !(beta > 0)) {
    throw PreconditionError("alpha and beta must be positive");
  }
  if (alpha > beta) throw PreconditionError("alpha must not exceed beta");
  if (clients == 0 || embedding_dim == 0 || samples == 0) {
    throw PreconditionError("toy dimensions must be positive");
  }
  if (!(sigma >= 0) || !(clip > 0)) {
    throw PreconditionError("sigma must be non-negative and clip positive");
  }
}

double ConvergenceToy::Eigenvalue(std::size_t j) const {
  const std::size_t n = dimension();
  if (n == 1) return beta;
  return alpha + (beta - alpha) * static_cast<double>(j) / static_cast<double>(n - 1);
}

double ConvergenceFloor(const ConvergenceToy& toy) {
  toy.Validate();
  const double d = static_cast<double>(toy.embedding_dim);
  return 0.5 * d * toy.sigma * toy.sigma * toy.clip * toy.clip *
         static_cast<double>(toy.clients) * toy.embedding_lipschitz() * toy.beta /
         (static_cast<double>(toy.samples) * toy.alpha);
}

double ConvergenceBound(const ConvergenceToy& toy, double gap0, std::size_t epoch) {
  const double decay = std::pow(1.0 - toy.alpha / toy.beta, static_cast<double>(epoch));
  return decay * gap0 + ConvergenceFloor(toy) * (1.0 - decay);
}

bool ConvergenceReport::Holds(double slack) const {
  for (std::size_t e = 0; e < mean_gap.size(); ++e) {
    if (mean_gap[e] > bound[e] * slack) return false;
  }
  return true;
}

std::string ConvergenceReport::ToText() const {
  std::ostringstream os;
  os.precision(10);
  os << "alpha " << toy.alpha << "\nbeta " << toy.beta << "\nsigma " << toy.sigma
     << "\nclients " << toy.clients << "\nembedding_dim " << toy.embedding_dim
     << "\nsamples " << toy.samples << "\nlipschitz " << toy.embedding_lipschitz()
     << "\nseeds " << seeds << "\nfloor " << floor << "\nmax_bound_ratio "
     << max_bound_ratio << "\nmax_decay_ratio " << max_decay_ratio << "\n";
  os << "epoch\tmean_gap\tbound\tpure_decay\n";
  for (std::size_t e = 0; e < mean_gap.size(); ++e) {
    os << e << '\t' << mean_gap[e] << '\t' << bound[e] << '\t' << pure_decay[e] << '\n';
  }
  return os.str();
}

ConvergenceReport VerifyConvergenceBound(const ConvergenceToy& toy,
                                         std::size_t seeds,
                                         std::uint64_t master_seed) {
  toy.Validate();
  if (seeds == 0) throw PreconditionError("need at least one seed");
  const std::size_t n = toy.dimension();
  const std::size_t steps = toy.epochs;
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = toy.Eigenvalue(j);
  const double eta = toy.learning_rate();
  // Std of the sample-averaged embedding noise.
  const double noise_sd =
      toy.sigma * toy.clip / std::sqrt(static_cast<double>(toy.samples));
  const double rate = 1.0 - toy.alpha / toy.beta;

  ConvergenceReport r;
  r.toy = toy;
  r.seeds = seeds;
  r.mean_gap.assign(steps + 1, 0.0);
  std::vector<double> phi(n), gaps(steps + 1);
  for (std::size_t s = 0; s < seeds; ++s) {
    CounterRng init(DeriveKey(master_seed, kStreamConvInit, s, 0));
    CounterRng noise(DeriveKey(master_seed, kStreamConvNoise, s, 0));
    for (double& v : phi) v = init.Normal();
    auto gap = [&]() {
      double g = 0.0;
      for (std::size_t j = 0; j < n; ++j) g += 0.5 * a[j] * phi[j] * phi[j];
      return g;
    };
    gaps[0] = gap();
    for (std::size_t e = 1; e <= steps; ++e) {
      for (std::size_t j = 0; j < n; ++j) {
        const double xi = noise_sd > 0 ? noise_sd * noise.Normal() : 0.0;
        phi[j] -= eta * a[j] * (phi[j] + xi);
      }
      gaps[e] = gap();
    }
    for (std::size_t e = 0; e <= steps; ++e) {
      r.mean_gap[e] += gaps[e];
      const double decay = std::pow(rate, static_cast<double>(e)) * gaps[0];
      if (decay > 0) r.max_decay_ratio = std::max(r.max_decay_ratio, gaps[e] / decay);
    }
  }
  for (double& g : r.mean_gap) g /= static_cast<double>(seeds);
  r.floor = ConvergenceFloor(toy);
  for (std::size_t e = 0; e <= steps; ++e) {
    r.bound.push_back(ConvergenceBound(toy, r.mean_gap[0], e));
    r.pure_decay.push_back(std::pow(rate, static_cast<double>(e)) * r.mean_gap[0]);
    r.max_bound_ratio = std::max(r.max_bound_ratio, r.mean_gap[e] / r.bound[e]);
  }
  return r;
}

}  // namespace bvfl
