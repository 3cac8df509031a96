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

#include "bvfl/bayes/prior.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double NormalLogPdf(double w, double mean, double sd) {
  const double z = (w - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

}  // namespace

void ValidatePrior(const PriorSpec& prior) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    if (!(g->stddev > 0)) {
      throw PreconditionError("gaussian prior stddev must be positive");
    }
    return;
  }
  const auto& s = std::get<SpikeSlabPrior>(prior);
  if (!(s.spike_stddev > 0) || !(s.slab_stddev > 0)) {
    throw PreconditionError("spike/slab stddevs must be positive");
  }
  if (!(s.pi >= 0.0 && s.pi <= 1.0)) {
    throw PreconditionError("spike-slab mixing probability must be in [0, 1]");
  }
}

double PriorLogDensity(const PriorSpec& prior, double w) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    return NormalLogPdf(w, g->mean, g->stddev);
  }
  const auto& s = std::get<SpikeSlabPrior>(prior);
  if (s.pi == 0.0) return NormalLogPdf(w, 0.0, s.slab_stddev);
  if (s.pi == 1.0) return NormalLogPdf(w, 0.0, s.spike_stddev);
  const double a = std::log(s.pi) + NormalLogPdf(w, 0.0, s.spike_stddev);
  const double b = std::log1p(-s.pi) + NormalLogPdf(w, 0.0, s.slab_stddev);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::string PriorToString(const PriorSpec& prior) {
  std::ostringstream os;
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    os << "gaussian(mean=" << g->mean << ",sd=" << g->stddev << ")";
  } else {
    const auto& s = std::get<SpikeSlabPrior>(prior);
    os << "spike_slab(pi=" << s.pi << ",spike=" << s.spike_stddev
       << ",slab=" << s.slab_stddev << ")";
  }
  return os.str();
}

}  // namespace bvfl
