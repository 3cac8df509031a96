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

#include "bvfl/bayes/variational.h"

#include <cmath>

#include "bvfl/autodiff/ops.h"
#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void RequireSame(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.SameShape(b)) {
    throw DimensionError(std::string(what) + ": shape " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

}  // namespace

double Softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor NormalTensor(const Shape& shape, CounterRng& rng) {
  Tensor t(shape);
  for (double& v : t.mutable_data()) v = rng.Normal();
  return t;
}

Var Reparameterize(Var mu, Var rho, const Tensor& eps) {
  RequireSame(mu.value(), rho.value(), "reparameterize");
  RequireSame(mu.value(), eps, "reparameterize");
  const Tensor& M = mu.value();
  const Tensor& R = rho.value();
  Tensor w(M.shape());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = M[i] + Softplus(R[i]) * eps[i];
  CheckFinite(w, "reparameterize");
  return mu.tape->Record(std::move(w), {mu, rho},
                         [eps](BackwardContext& ctx) {
                           auto g = ctx.grad_out();
                           if (auto gm = ctx.input_grad(0); !gm.empty()) {
                             for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
                           }
                           if (auto gr = ctx.input_grad(1); !gr.empty()) {
                             const Tensor& R = ctx.input(1);
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               gr[i] += g[i] * eps[i] * Sigmoid(R[i]);
                             }
                           }
                         });
}

Var GaussianKlSum(Var mu, Var rho, const GaussianPrior& prior) {
  RequireSame(mu.value(), rho.value(), "gaussian_kl");
  const Tensor& M = mu.value();
  const Tensor& R = rho.value();
  const double s0 = prior.stddev;
  double kl = 0.0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double s = Softplus(R[i]);
    const double d = M[i] - prior.mean;
    kl += std::log(s0 / s) + (s * s + d * d) / (2.0 * s0 * s0) - 0.5;
  }
  Tensor out = Tensor::Scalar(kl);
  CheckFinite(out, "gaussian_kl");
  return mu.tape->Record(std::move(out), {mu, rho},
                         [prior](BackwardContext& ctx) {
                           const double g = ctx.grad_out()[0];
                           const Tensor& M = ctx.input(0);
                           const Tensor& R = ctx.input(1);
                           const double v0 = prior.stddev * prior.stddev;
                           auto gm = ctx.input_grad(0);
                           auto gr = ctx.input_grad(1);
                           for (std::size_t i = 0; i < M.size(); ++i) {
                             if (!gm.empty()) gm[i] += g * (M[i] - prior.mean) / v0;
                             if (!gr.empty()) {
                               const double s = Softplus(R[i]);
                               gr[i] += g * (-1.0 / s + s / v0) * Sigmoid(R[i]);
                             }
                           }
                         });
}

Var SpikeSlabKlSample(Var mu, Var rho, const Tensor& eps,
                      const SpikeSlabPrior& prior) {
  RequireSame(mu.value(), rho.value(), "spike_slab_kl");
  RequireSame(mu.value(), eps, "spike_slab_kl");
  const Tensor& M = mu.value();
  const Tensor& R = rho.value();
  const double log_pi = prior.pi > 0 ? std::log(prior.pi) : 0.0;
  const double log_1mpi = prior.pi < 1 ? std::log1p(-prior.pi) : 0.0;
  const double v1 = prior.spike_stddev * prior.spike_stddev;
  const double v2 = prior.slab_stddev * prior.slab_stddev;
  const double c1 = log_pi - std::log(prior.spike_stddev) - kHalfLog2Pi;
  const double c2 = log_1mpi - std::log(prior.slab_stddev) - kHalfLog2Pi;
  const bool use1 = prior.pi > 0.0;
  const bool use2 = prior.pi < 1.0;

  // Per element: the KL value and d(-log p)/dw.
  std::vector<double> dneglogp(M.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double s = Softplus(R[i]);
    const double w = M[i] + s * eps[i];
    const double log_q = -std::log(s) - 0.5 * eps[i] * eps[i] - kHalfLog2Pi;
    const double a = use1 ? c1 - 0.5 * w * w / v1 : -INFINITY;
    const double b = use2 ? c2 - 0.5 * w * w / v2 : -INFINITY;
    const double m = std::max(a, b);
    const double ea = use1 ? std::exp(a - m) : 0.0;
    const double eb = use2 ? std::exp(b - m) : 0.0;
    const double log_p = m + std::log(ea + eb);
    const double r1 = ea / (ea + eb);
    const double r2 = eb / (ea + eb);
    dneglogp[i] = w * ((use1 ? r1 / v1 : 0.0) + (use2 ? r2 / v2 : 0.0));
    kl += log_q - log_p;
  }
  Tensor out = Tensor::Scalar(kl);
  CheckFinite(out, "spike_slab_kl");
  return mu.tape->Record(
      std::move(out), {mu, rho},
      [eps, dneglogp = std::move(dneglogp)](BackwardContext& ctx) {
        const double g = ctx.grad_out()[0];
        const Tensor& R = ctx.input(1);
        auto gm = ctx.input_grad(0);
        auto gr = ctx.input_grad(1);
        for (std::size_t i = 0; i < dneglogp.size(); ++i) {
          // d log q / d mu = 0 and d log q / d s = -1/s along the path.
          if (!gm.empty()) gm[i] += g * dneglogp[i];
          if (!gr.empty()) {
            const double s = Softplus(R[i]);
            gr[i] += g * (-1.0 / s + eps[i] * dneglogp[i]) * Sigmoid(R[i]);
          }
        }
      });
}

void AppendKl(ForwardContext& ctx, Var mu, Var rho, const Tensor& eps,
              const PriorSpec& prior) {
  if (ctx.kl_terms == nullptr) return;
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    ctx.kl_terms->push_back(GaussianKlSum(mu, rho, *g));
  } else {
    ctx.kl_terms->push_back(
        SpikeSlabKlSample(mu, rho, eps, std::get<SpikeSlabPrior>(prior)));
  }
}

VariationalLinear::VariationalLinear(std::string name, std::size_t in,
                                     std::size_t out, PriorSpec prior,
                                     CounterRng& init_rng)
    : name_(std::move(name)), in_(in), out_(out), prior_(prior) {
  ValidatePrior(prior_);
  if (in == 0 || out == 0) throw DimensionError("linear layer width is zero");
  const double sd = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w({in, out});
  for (double& v : w.mutable_data()) v = sd * init_rng.Normal();
  weight_mu = Parameter(name_ + ".weight_mu", std::move(w));
  weight_rho =
      Parameter(name_ + ".weight_rho", Tensor::Full({in, out}, kInitialRho));
  bias_mu = Parameter(name_ + ".bias_mu", Tensor::Zeros({out}));
  bias_rho = Parameter(name_ + ".bias_rho", Tensor::Full({out}, kInitialRho));
}

VariationalLinear::Weights VariationalLinear::SampleWeights(
    ForwardContext& ctx) {
  if (ctx.mode == WeightMode::kMean) {
    return SampleWeights(ctx, Tensor(), Tensor());
  }
  if (ctx.weight_rng == nullptr) {
    throw ContractError(name_ + ": sample mode needs a weight stream");
  }
  Tensor ew = NormalTensor(weight_mu.value.shape(), *ctx.weight_rng);
  Tensor eb = NormalTensor(bias_mu.value.shape(), *ctx.weight_rng);
  return SampleWeights(ctx, ew, eb);
}

VariationalLinear::Weights VariationalLinear::SampleWeights(
    ForwardContext& ctx, const Tensor& weight_eps, const Tensor& bias_eps) {
  Tape& tape = *ctx.tape;
  Var wm = tape.Bind(weight_mu);
  Var bm = tape.Bind(bias_mu);
  if (ctx.mode == WeightMode::kMean) return {wm, bm};
  Var wr = tape.Bind(weight_rho);
  Var br = tape.Bind(bias_rho);
  Weights out{Reparameterize(wm, wr, weight_eps),
              Reparameterize(bm, br, bias_eps)};
  AppendKl(ctx, wm, wr, weight_eps, prior_);
  AppendKl(ctx, bm, br, bias_eps, prior_);
  return out;
}

Var VariationalLinear::Forward(ForwardContext& ctx, Var x) {
  if (x.value().ndim() != 2 || x.value().cols() != in_) {
    throw DimensionError(name_ + ": expected input width " +
                         std::to_string(in_) + ", got shape " +
                         ShapeToString(x.value().shape()));
  }
  Weights w = SampleWeights(ctx);
  return ops::AddRow(ops::MatMul(x, w.weight), w.bias);
}

ParamList VariationalLinear::parameters() {
  return {&weight_mu, &weight_rho, &bias_mu, &bias_rho};
}

BayesianEmbedding::BayesianEmbedding(std::string name, std::size_t vocab,
                                     std::size_t width, PriorSpec prior,
                                     CounterRng& init_rng)
    : name_(std::move(name)), vocab_(vocab), width_(width), prior_(prior) {
  ValidatePrior(prior_);
  if (vocab == 0 || width == 0) throw DimensionError("empty embedding table");
  Tensor m({vocab, width});
  for (double& v : m.mutable_data()) v = init_rng.Normal();
  mu = Parameter(name_ + ".mu", std::move(m));
  rho = Parameter(name_ + ".rho", Tensor::Full({vocab, width}, kInitialRho));
}

Var BayesianEmbedding::Forward(ForwardContext& ctx,
                               std::span<const std::size_t> indices) {
  Tape& tape = *ctx.tape;
  Var m = tape.Bind(mu);
  Var table = m;
  if (ctx.mode == WeightMode::kSample) {
    if (ctx.weight_rng == nullptr) {
      throw ContractError(name_ + ": sample mode needs a weight stream");
    }
    Var r = tape.Bind(rho);
    Tensor eps = NormalTensor(mu.value.shape(), *ctx.weight_rng);
    table = Reparameterize(m, r, eps);
    AppendKl(ctx, m, r, eps, prior_);
  }
  return ops::EmbeddingLookup(table, indices);
}

ParamList BayesianEmbedding::parameters() { return {&mu, &rho}; }

}  // namespace bvfl
