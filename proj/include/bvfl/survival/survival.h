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
#ifndef BVFL_SURVIVAL_SURVIVAL_H_
#define BVFL_SURVIVAL_SURVIVAL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "bvfl/autodiff/tape.h"
#include "bvfl/autodiff/tensor.h"

namespace bvfl {

inline constexpr double kHazardClip = 1e-7;

// p equal-width intervals over (0, t_max]; cut point j (0-based) is
// (j + 1) * t_max / p, so the last cut equals t_max.
class TimeGrid {
 public:
  TimeGrid(std::size_t intervals, double t_max);

  std::size_t intervals() const { return cuts_.size(); }
  double t_max() const { return t_max_; }
  double width() const { return t_max_ / static_cast<double>(cuts_.size()); }
  const std::vector<double>& cuts() const { return cuts_; }
  // Interior cut points, excluding t_max.
  std::span<const double> interior() const {
    return std::span<const double>(cuts_).first(cuts_.size() - 1);
  }

 private:
  double t_max_;
  std::vector<double> cuts_;
};

// Interval j with cut[j-1] < time <= cut[j] (cut[-1] = 0). Zero maps to 0,
// times above t_max clamp to the last interval.
std::size_t Discretize(double time, const TimeGrid& grid);

struct TargetMask {
  Tensor indicator;  // N x p, one-hot at the event interval for events
  Tensor exposure;   // N x p, ones through the subject's interval
};

TargetMask BuildTargets(std::span<const double> times,
                        std::span<const int> events, const TimeGrid& grid);
// Restriction of the targets to the given rows.
TargetMask SelectTargets(const TargetMask& all,
                         std::span<const std::size_t> rows);

// S_ij = prod_{l <= j} (1 - h_il).
Tensor HazardsToSurvival(const Tensor& hazards);

// Mean over subjects of the masked Bernoulli negative log-likelihood, with
// hazards clipped to [kHazardClip, 1 - kHazardClip].
double Nll(const Tensor& hazards, const TargetMask& targets);

// Differentiable form of Nll. Clipped entries receive zero gradient.
Var NllLoss(Var hazards, const TargetMask& targets);

}  // namespace bvfl

#endif  // BVFL_SURVIVAL_SURVIVAL_H_
