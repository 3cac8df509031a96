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
#include "bvfl/survival/survival.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

void CheckTargets(const Tensor& h, const TargetMask& t) {
  if (h.ndim() != 2 || !h.SameShape(t.indicator) ||
      !h.SameShape(t.exposure)) {
    throw DimensionError("hazards " + ShapeToString(h.shape()) +
                         " do not match targets " +
                         ShapeToString(t.indicator.shape()));
  }
}

double Clip(double h) {
  if (std::isnan(h)) throw NumericError("hazard is NaN");
  return std::clamp(h, kHazardClip, 1.0 - kHazardClip);
}

}  // namespace

TimeGrid::TimeGrid(std::size_t intervals, double t_max) : t_max_(t_max) {
  if (intervals == 0) throw PreconditionError("time grid needs p >= 1");
  if (!(t_max > 0) || !std::isfinite(t_max)) {
    throw PreconditionError("time grid needs a positive finite t_max");
  }
  cuts_.resize(intervals);
  for (std::size_t j = 0; j < intervals; ++j) {
    cuts_[j] = static_cast<double>(j + 1) * t_max / static_cast<double>(intervals);
  }
  cuts_.back() = t_max;
}

std::size_t Discretize(double time, const TimeGrid& grid) {
  if (!(time >= 0)) throw PreconditionError("negative or NaN survival time");
  const auto& cuts = grid.cuts();
  const std::size_t p = cuts.size();
  if (time >= grid.t_max()) return p - 1;
  // First cut >= time.
  return static_cast<std::size_t>(
      std::lower_bound(cuts.begin(), cuts.end(), time) - cuts.begin());
}

TargetMask BuildTargets(std::span<const double> times,
                        std::span<const int> events, const TimeGrid& grid) {
  if (times.size() != events.size()) {
    throw DimensionError("times and events differ in length");
  }
  const std::size_t n = times.size();
  const std::size_t p = grid.intervals();
  TargetMask out{Tensor::Zeros({std::max<std::size_t>(n, 1), p}),
                 Tensor::Zeros({std::max<std::size_t>(n, 1), p})};
  if (n == 0) throw PreconditionError("no subjects");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = Discretize(times[i], grid);
    for (std::size_t l = 0; l <= j; ++l) out.exposure.at(i, l) = 1.0;
    if (events[i] != 0) out.indicator.at(i, j) = 1.0;
  }
  return out;
}

TargetMask SelectTargets(const TargetMask& all,
                         std::span<const std::size_t> rows) {
  const std::size_t p = all.indicator.cols();
  TargetMask out{Tensor::Zeros({rows.size(), p}),
                 Tensor::Zeros({rows.size(), p})};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= all.indicator.rows()) {
      throw PreconditionError("target row out of range");
    }
    std::copy_n(all.indicator.row(rows[r]).begin(), p,
                out.indicator.mutable_row(r).begin());
    std::copy_n(all.exposure.row(rows[r]).begin(), p,
                out.exposure.mutable_row(r).begin());
  }
  return out;
}

Tensor HazardsToSurvival(const Tensor& hazards) {
  if (hazards.ndim() != 2) throw DimensionError("hazards must be N x p");
  Tensor s(hazards.shape());
  for (std::size_t i = 0; i < hazards.rows(); ++i) {
    double acc = 1.0;
    for (std::size_t j = 0; j < hazards.cols(); ++j) {
      acc *= 1.0 - hazards.at(i, j);
      s.at(i, j) = acc;
    }
  }
  return s;
}

double Nll(const Tensor& hazards, const TargetMask& targets) {
  CheckTargets(hazards, targets);
  double total = 0.0;
  for (std::size_t k = 0; k < hazards.size(); ++k) {
    if (targets.exposure[k] == 0.0) continue;
    const double h = Clip(hazards[k]);
    total -= targets.indicator[k] != 0.0 ? std::log(h) : std::log1p(-h);
  }
  return total / static_cast<double>(hazards.rows());
}

Var NllLoss(Var hazards, const TargetMask& targets) {
  const Tensor& h = hazards.value();
  Tensor out = Tensor::Scalar(Nll(h, targets));
  return hazards.tape->Record(
      std::move(out), {hazards}, [targets](BackwardContext& ctx) {
        const double g = ctx.grad_out()[0];
        const Tensor& h = ctx.input(0);
        auto gh = ctx.input_grad(0);
        const double inv_n = 1.0 / static_cast<double>(h.rows());
        for (std::size_t k = 0; k < h.size(); ++k) {
          if (targets.exposure[k] == 0.0) continue;
          if (h[k] < kHazardClip || h[k] > 1.0 - kHazardClip) continue;
          gh[k] += targets.indicator[k] != 0.0 ? -g * inv_n / h[k]
                                               : g * inv_n / (1.0 - h[k]);
        }
      });
}

}  // namespace bvfl
