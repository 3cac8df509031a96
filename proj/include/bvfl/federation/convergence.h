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


#ifndef BVFL_FEDERATION_CONVERGENCE_H_
#define BVFL_FEDERATION_CONVERGENCE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bvfl {

// Quadratic objective J(Phi) = 1/2 Phi^T A Phi over M client blocks of
// `embedding_dim` coordinates each. A is diagonal with its spectrum spread
// evenly over [alpha, beta]. Each client's embedding is its own block
// (identity map, so L_E = 1), and every sample's embedding receives
// N(0, sigma^2 C^2) noise; the averaged perturbation enters the gradient as
// A * mean_i(xi_i).
struct ConvergenceToy {
  std::size_t clients = 2;          // M
  std::size_t embedding_dim = 512;  // d
  std::size_t samples = 100;        // N
  double alpha = 0.1;
  double beta = 1.0;
  double sigma = 0.0;
  double clip = 1.0;  // C
  std::size_t epochs = 50;  // L

  void Validate() const;
  double learning_rate() const { return 1.0 / beta; }
  // Operator norm of the identity embedding map.
  double embedding_lipschitz() const { return 1.0; }
  std::size_t dimension() const { return clients * embedding_dim; }
  double Eigenvalue(std::size_t j) const;
};

// (1 - a/b)^L gap0 + (d/2) sigma^2 C^2 M L_E b / (N a) [1 - (1 - a/b)^L].
// With d = 512 and C = 1 the second coefficient is 256 sigma^2 M L_E b / (N a).
double ConvergenceBound(const ConvergenceToy& toy, double gap0, std::size_t epoch);
// Limit of the second term as L grows.
double ConvergenceFloor(const ConvergenceToy& toy);

struct ConvergenceReport {
  ConvergenceToy toy;
  std::size_t seeds = 0;
  std::vector<double> mean_gap;    // epochs + 1 entries, index 0 is the start
  std::vector<double> bound;       // from the mean starting gap
  std::vector<double> pure_decay;  // (1 - a/b)^e * mean starting gap
  double floor = 0.0;
  // max over epochs of mean_gap / bound.
  double max_bound_ratio = 0.0;
  // max over seeds and epochs of gap / ((1 - a/b)^e gap0) for that seed.
  double max_decay_ratio = 0.0;

  // Every epoch within bound * slack.
  bool Holds(double slack) const;
  std::string ToText() const;
};

// Gradient descent with eta = 1/beta from Phi0 ~ N(0, I), one independent run
// per seed; gaps are averaged across seeds.
ConvergenceReport VerifyConvergenceBound(const ConvergenceToy& toy,
                                         std::size_t seeds,
                                         std::uint64_t master_seed);

}  // namespace bvfl

#endif  // BVFL_FEDERATION_CONVERGENCE_H_
