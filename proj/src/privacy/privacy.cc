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

#include "bvfl/privacy/privacy.h"

#include <cmath>
#include <sstream>

#include "bvfl/common/error.h"

namespace bvfl {

void PrivacyParams::Validate() const {
  if (!(epsilon > 0)) throw PreconditionError("epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) throw PreconditionError("delta must be in (0, 1)");
  if (!(p_sample > 0 && p_sample <= 1)) {
    throw PreconditionError("sampling probability must be in (0, 1]");
  }
  if (tau < 1) throw PreconditionError("tau must be >= 1");
  if (!(clip > 0)) throw PreconditionError("clip bound must be > 0");
  if (!(c2 > 0)) throw PreconditionError("c2 must be > 0");
}

double PrivacyParams::ResolvedSigma() const {
  if (sigma > 0) return sigma;
  return CalibrateSigma(epsilon, delta, p_sample, tau, c2);
}

Tensor ClipL2(const Tensor& rows, double bound) {
  if (!(bound > 0)) throw PreconditionError("clip bound must be > 0");
  Tensor out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.mutable_row(r);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double scale = std::min(1.0, bound / (std::sqrt(sq) + kClipGuard));
    for (double& v : row) v *= scale;
  }
  return out;
}

Var ClipL2Rows(Var rows, double bound) {
  Tensor out = ClipL2(rows.value(), bound);
  return rows.tape->Record(
      std::move(out), {rows}, [bound](BackwardContext& ctx) {
        auto gx = ctx.input_grad(0);
        if (gx.empty()) return;
        const Tensor& x = ctx.input(0);
        const auto g = ctx.grad_out();
        const std::size_t w = x.cols();
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const auto row = x.row(r);
          double sq = 0.0, dot = 0.0;
          for (std::size_t c = 0; c < w; ++c) {
            sq += row[c] * row[c];
            dot += row[c] * g[r * w + c];
          }
          const double n = std::sqrt(sq);
          const double d = n + kClipGuard;
          if (bound / d >= 1.0) {
            for (std::size_t c = 0; c < w; ++c) gx[r * w + c] += g[r * w + c];
            continue;
          }
          // d/dx [x C / (|x| + g)] = C/d I - C x x^T / (d^2 |x|)
          const double s = bound / d;
          const double k = bound * dot / (d * d * n);
          for (std::size_t c = 0; c < w; ++c) {
            gx[r * w + c] += s * g[r * w + c] - k * row[c];
          }
        }
      });
}

Tensor Perturb(const Tensor& rows, double sigma, double bound,
               CounterRng& rng) {
  if (!(sigma >= 0)) throw PreconditionError("sigma must be >= 0");
  Tensor out = rows;
  if (sigma == 0.0) return out;
  const double sd = sigma * bound;
  for (double& v : out.mutable_data()) v += sd * rng.Normal();
  return out;
}

double CalibrateSigma(double epsilon, double delta, double p_sample,
                      std::int64_t tau, double c2) {
  PrivacyParams p{epsilon, delta, p_sample, tau, 1.0, c2};
  p.Validate();
  return c2 * p_sample *
         std::sqrt(static_cast<double>(tau) * std::log(1.0 / delta)) / epsilon;
}

DeltaResult DeltaFor(double epsilon, double sigma, std::int64_t tau,
                     double p_sample) {
  if (!(sigma > 0)) throw PreconditionError("sigma must be > 0");
  if (!(epsilon > 0) || tau < 1 || !(p_sample > 0)) {
    throw PreconditionError("invalid accountant inputs");
  }
  const double t = static_cast<double>(tau);
  const double p2 = p_sample * p_sample;
  DeltaResult r;
  r.delta = std::exp(-epsilon * epsilon * sigma * sigma / (4.0 * t * p2));
  r.lambda_star = epsilon * sigma * sigma / (2.0 * t * p2);
  return r;
}

double StepMomentBound(double p_sample, double sigma, double lambda) {
  if (!(p_sample < 1)) {
    throw PreconditionError("per-step moment bound needs p < 1");
  }
  return p_sample * p_sample * lambda * (lambda + 1.0) /
         ((1.0 - p_sample) * sigma * sigma);
}

AccountantReport MakeAccountantReport(const PrivacyParams& params) {
  params.Validate();
  AccountantReport r;
  r.epsilon = params.epsilon;
  r.delta_target = params.delta;
  r.sigma = params.ResolvedSigma();
  r.tau = params.tau;
  r.p_sample = params.p_sample;
  r.c2 = params.c2;
  r.clip = params.clip;
  const DeltaResult d = DeltaFor(r.epsilon, r.sigma, r.tau, r.p_sample);
  r.delta_achieved = d.delta;
  r.lambda_star = d.lambda_star;
  if (r.p_sample < 1.0) {
    r.moment_per_step = StepMomentBound(r.p_sample, r.sigma, r.lambda_star);
    r.moment_composed = static_cast<double>(r.tau) * r.moment_per_step;
  } else {
    r.moment_per_step = INFINITY;
    r.moment_composed = INFINITY;
  }
  r.moment_composed_asymptotic = static_cast<double>(r.tau) * r.p_sample *
                                 r.p_sample * r.lambda_star * r.lambda_star /
                                 (r.sigma * r.sigma);
  return r;
}

std::string AccountantReport::ToText() const {
  std::ostringstream os;
  os.precision(10);
  os << "epsilon=" << epsilon << "\n"
     << "delta_target=" << delta_target << "\n"
     << "delta_achieved=" << delta_achieved << "\n"
     << "sigma=" << sigma << "\n"
     << "tau=" << tau << "\n"
     << "p_sample=" << p_sample << "\n"
     << "c2=" << c2 << "\n"
     << "clip=" << clip << "\n"
     << "lambda_star=" << lambda_star << "\n"
     << "moment_per_step=" << moment_per_step << "\n"
     << "moment_composed=" << moment_composed << "\n"
     << "moment_composed_asymptotic=" << moment_composed_asymptotic << "\n";
  return os.str();
}

}  // namespace bvfl
