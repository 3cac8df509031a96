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

#ifndef BVFL_PRIVACY_PRIVACY_H_
#define BVFL_PRIVACY_PRIVACY_H_

#include <cstdint>
#include <span>
#include <string>

#include "bvfl/autodiff/tape.h"
#include "bvfl/autodiff/tensor.h"
#include "bvfl/common/rng.h"

namespace bvfl {

// Denominator guard of the clipping rule.
inline constexpr double kClipGuard = 1e-6;

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 1e-5;
  double p_sample = 0.01;
  std::int64_t tau = 1;
  double clip = 1.0;
  double c2 = 1.0;
  // Noise multiplier; <= 0 means "derive from the other fields".
  double sigma = 0.0;

  // Throws PreconditionError on the first violated invariant.
  void Validate() const;
  // sigma if set, otherwise CalibrateSigma(...).
  double ResolvedSigma() const;
};

// v * min(1, C / (||v|| + guard)) applied to every row.
Tensor ClipL2(const Tensor& rows, double bound);
// Differentiable form of ClipL2.
Var ClipL2Rows(Var rows, double bound);
// Adds i.i.d. N(0, (sigma * C)^2) noise drawn from `rng`.
Tensor Perturb(const Tensor& rows, double sigma, double bound, CounterRng& rng);

double CalibrateSigma(double epsilon, double delta, double p_sample,
                      std::int64_t tau, double c2);

struct DeltaResult {
  double delta = 1.0;
  double lambda_star = 0.0;
};

// Tail bound exp(-eps^2 sigma^2 / (4 tau p^2)) at the optimal moment order.
DeltaResult DeltaFor(double epsilon, double sigma, std::int64_t tau,
                     double p_sample);

// Log-moment bound of one subsampled Gaussian step at order lambda.
double StepMomentBound(double p_sample, double sigma, double lambda);

struct AccountantReport {
  double epsilon = 0.0;
  double delta_target = 0.0;
  double delta_achieved = 0.0;
  double sigma = 0.0;
  std::int64_t tau = 0;
  double p_sample = 0.0;
  double c2 = 0.0;
  double clip = 0.0;
  double lambda_star = 0.0;
  double moment_per_step = 0.0;
  // tau * per-step bound (additive composition).
  double moment_composed = 0.0;
  // tau p^2 lambda^2 / sigma^2.
  double moment_composed_asymptotic = 0.0;

  std::string ToText() const;
};

AccountantReport MakeAccountantReport(const PrivacyParams& params);

}  // namespace bvfl

#endif  // BVFL_PRIVACY_PRIVACY_H_
