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

#ifndef BVFL_BAYES_PRIOR_H_
#define BVFL_BAYES_PRIOR_H_

#include <string>
#include <variant>

namespace bvfl {

struct GaussianPrior {
  double mean = 0.0;
  double stddev = 1.0;
};

// Two-component mixture  pi * N(0, spike^2) + (1 - pi) * N(0, slab^2).
struct SpikeSlabPrior {
  double pi = 0.5;
  double spike_stddev = 0.001;
  double slab_stddev = 0.3;
};

using PriorSpec = std::variant<GaussianPrior, SpikeSlabPrior>;

// Throws PreconditionError when stddevs are not positive or pi is outside
// [0, 1].
void ValidatePrior(const PriorSpec& prior);

// Log-density of the prior at w (mixture evaluated in log-sum-exp form).
double PriorLogDensity(const PriorSpec& prior, double w);

std::string PriorToString(const PriorSpec& prior);

inline PriorSpec DefaultPrior() { return SpikeSlabPrior{}; }

}  // namespace bvfl

#endif  // BVFL_BAYES_PRIOR_H_
