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

#ifndef BVFL_METRICS_METRICS_H_
#define BVFL_METRICS_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bvfl/autodiff/tensor.h"
#include "bvfl/survival/survival.h"

namespace bvfl {

// Right-continuous step function: `initial` before the first knot, then
// values[k] on [knots[k], knots[k+1]).
class StepFunction {
 public:
  StepFunction(double initial, std::vector<double> knots,
               std::vector<double> values);

  double operator()(double t) const;
  // lim_{s -> t-} f(s).
  double LeftLimit(double t) const;

  double initial() const { return initial_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double initial_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

// Product-limit estimator. Pass flipped events to estimate the censoring
// distribution.
StepFunction KaplanMeier(std::span<const double> times,
                         std::span<const int> events);

// Survival curve of subject `row` of an N x p survival matrix on `grid`.
StepFunction CurveFromMatrix(const Tensor& survival, std::size_t row,
                             const TimeGrid& grid);

// 1 - mean_j S_ij per subject.
std::vector<double> RiskScores(const Tensor& survival);

// Harrell's C: pairs with t_i < t_j and e_i = 1 are comparable; tied risks
// count one half.
double Concordance(std::span<const double> risks, std::span<const double> times,
                   std::span<const int> events);

// Antolini's time-dependent concordance on the grid-step survival curves.
double TdConcordance(const Tensor& survival, std::span<const double> times,
                     std::span<const int> events, const TimeGrid& grid);

struct IpcwScore {
  double value = 0.0;
  // Terms skipped because the censoring survival was zero.
  std::size_t dropped = 0;
};

// Brier score at a single time with IPCW weights from `censoring`.
IpcwScore BrierAt(const Tensor& survival, std::span<const double> times,
                  std::span<const int> events, const TimeGrid& grid,
                  const StepFunction& censoring, double t);

// Trapezoidal integral over the interior cut points divided by their span.
IpcwScore IntegratedBrier(const Tensor& survival, std::span<const double> times,
                          std::span<const int> events, const TimeGrid& grid);
IpcwScore Inbll(const Tensor& survival, std::span<const double> times,
                std::span<const int> events, const TimeGrid& grid);

struct MetricsReport {
  double cindex = 0.0;
  double td_cindex = 0.0;
  double ibs = 0.0;
  double inbll = 0.0;
  std::size_t ipcw_dropped = 0;

  // Flat "key=value" lines.
  std::string ToText() const;
};

MetricsReport EvaluateSurvival(const Tensor& survival,
                               std::span<const double> times,
                               std::span<const int> events,
                               const TimeGrid& grid);

}  // namespace bvfl

#endif  // BVFL_METRICS_METRICS_H_
