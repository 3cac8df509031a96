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
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bvfl/autodiff/gradcheck.h"
#include "bvfl/autodiff/ops.h"
#include "bvfl/bayes/kl.h"
#include "bvfl/bayes/variational.h"
#include "bvfl/common/error.h"

namespace bvfl {
namespace {

TEST(KlGaussianTest, ClosedFormValues) {
  EXPECT_NEAR(KlGaussian(0, 1, 0, 1), 0.0, 1e-12);
  EXPECT_NEAR(KlGaussian(1, 1, 0, 1), 0.5, 1e-12);
  EXPECT_NEAR(KlGaussian(0, 0.5, 0, 1), std::log(2.0) + 0.125 - 0.5, 1e-12);
  EXPECT_NEAR(KlGaussian(0, 0.5, 0, 1), 0.3181, 1e-4);
  EXPECT_THROW(KlGaussian(0, 0, 0, 1), PreconditionError);
  EXPECT_THROW(KlGaussian(0, 1, 0, -1), PreconditionError);
}

TEST(KlGaussianTest, NonNegative) {
  CounterRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double s = 0.1 + rng.Uniform();
    const double s0 = 0.1 + rng.Uniform();
    EXPECT_GE(KlGaussian(rng.Normal(), s, rng.Normal(), s0), 0.0);
  }
}

TEST(PriorTest, Validation) {
  EXPECT_THROW(ValidatePrior(GaussianPrior{0, 0}), PreconditionError);
  EXPECT_THROW(ValidatePrior(SpikeSlabPrior{1.5, 0.1, 0.3}), PreconditionError);
  EXPECT_THROW(ValidatePrior(SpikeSlabPrior{0.5, -0.1, 0.3}), PreconditionError);
  EXPECT_NO_THROW(ValidatePrior(DefaultPrior()));
  const auto& d = std::get<SpikeSlabPrior>(DefaultPrior());
  EXPECT_EQ(d.pi, 0.5);
  EXPECT_EQ(d.spike_stddev, 0.001);
  EXPECT_EQ(d.slab_stddev, 0.3);
}

TEST(PriorTest, MixtureDensity) {
  const SpikeSlabPrior p{0.5, 0.001, 0.3};
  const double w = 0.01;
  const double spike = std::exp(-0.5 * 100.0) / (0.001 * std::sqrt(2 * M_PI));
  const double slab =
      std::exp(-0.5 * (w / 0.3) * (w / 0.3)) / (0.3 * std::sqrt(2 * M_PI));
  EXPECT_NEAR(PriorLogDensity(p, w), std::log(0.5 * spike + 0.5 * slab), 1e-12);
  // Far tails stay finite in log-sum-exp form.
  EXPECT_TRUE(std::isfinite(PriorLogDensity(p, 50.0)));
}

VariationalLinear MakeLayer(PriorSpec prior, std::size_t in = 3,
                            std::size_t out = 2, std::uint64_t seed = 1) {
  CounterRng rng(seed);
  return VariationalLinear("l", in, out, prior, rng);
}

TEST(VariationalLinearTest, ZeroNoiseGivesMean) {
  VariationalLinear layer = MakeLayer(DefaultPrior());
  Tape tape;
  ForwardContext ctx{&tape};
  auto w = layer.SampleWeights(ctx, Tensor::Zeros({3, 2}), Tensor::Zeros({2}));
  EXPECT_EQ(w.weight.value(), layer.weight_mu.value);
  EXPECT_EQ(w.bias.value(), layer.bias_mu.value);
}

TEST(VariationalLinearTest, SoftplusOfZero) {
  EXPECT_NEAR(Softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(Softplus(0.0), 0.6931, 1e-4);
  EXPECT_NEAR(Softplus(-20.0), 2.061e-9, 1e-12);
}

TEST(VariationalLinearTest, EmpiricalStdOfSamples) {
  VariationalLinear layer = MakeLayer(DefaultPrior(), 1, 1);
  layer.weight_rho.value[0] = 0.0;
  CounterRng rng(17);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Tape tape(false);
    ForwardContext ctx{&tape, WeightMode::kSample, true, &rng};
    const double w = layer.SampleWeights(ctx).weight.value()[0];
    sum += w;
    sq += w * w;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd / std::log(2.0), 1.0, 0.01);
}

TEST(VariationalLinearTest, ForwardModes) {
  VariationalLinear layer = MakeLayer(DefaultPrior());
  const Tensor x = Tensor::FromRows({{1, 2, 3}, {0, -1, 0.5}});
  auto run = [&](WeightMode mode, std::uint64_t seed) {
    CounterRng rng(seed);
    Tape tape;
    ForwardContext ctx{&tape, mode, true, &rng};
    return layer.Forward(ctx, tape.Constant(x)).value();
  };
  EXPECT_EQ(run(WeightMode::kMean, 1), run(WeightMode::kMean, 2));
  EXPECT_EQ(run(WeightMode::kSample, 5), run(WeightMode::kSample, 5));
  EXPECT_NE(run(WeightMode::kSample, 5), run(WeightMode::kSample, 6));

  Tape tape;
  ForwardContext ctx{&tape, WeightMode::kMean};
  Tensor zero = layer.Forward(ctx, tape.Constant(Tensor::Zeros({2, 3}))).value();
  for (double v : zero.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(layer.Forward(ctx, tape.Constant(Tensor::Zeros({2, 4}))),
               DimensionError);
}

TEST(VariationalLinearTest, MeanModeAddsNoKl) {
  VariationalLinear layer = MakeLayer(DefaultPrior());
  std::vector<Var> kl;
  Tape tape;
  ForwardContext ctx{&tape, WeightMode::kMean, true, nullptr, nullptr, &kl};
  layer.Forward(ctx, tape.Constant(Tensor::Zeros({1, 3})));
  EXPECT_TRUE(kl.empty());
  CounterRng rng(1);
  ForwardContext sctx{&tape, WeightMode::kSample, true, &rng, nullptr, &kl};
  layer.Forward(sctx, tape.Constant(Tensor::Zeros({1, 3})));
  EXPECT_EQ(kl.size(), 2u);
}

// Gradient of a sampled forward pass plus its KL with the draw held fixed.
void CheckLayerGradients(PriorSpec prior) {
  VariationalLinear layer = MakeLayer(prior, 4, 3, 9);
  CounterRng init(4);
  for (double& v : layer.weight_rho.value.mutable_data()) v = -1.0 + 0.3 * init.Normal();
  for (double& v : layer.bias_rho.value.mutable_data()) v = -1.0 + 0.3 * init.Normal();
  const Tensor ew = NormalTensor({4, 3}, init);
  const Tensor eb = NormalTensor({3}, init);
  const Tensor x = NormalTensor({5, 4}, init);

  auto loss = [&](Var wm, Var wr, Var bm, Var br) {
    Tape& t = *wm.tape;
    Var w = Reparameterize(wm, wr, ew);
    Var b = Reparameterize(bm, br, eb);
    Var y = ops::Sum(ops::Tanh(ops::AddRow(ops::MatMul(t.Constant(x), w), b)));
    std::vector<Var> kl;
    ForwardContext ctx{&t, WeightMode::kSample, true, nullptr, nullptr, &kl};
    AppendKl(ctx, wm, wr, ew, prior);
    AppendKl(ctx, bm, br, eb, prior);
    return ops::Add(y, ops::Scale(ops::Add(kl[0], kl[1]), 0.01));
  };
  const Tensor wm = layer.weight_mu.value, wr = layer.weight_rho.value;
  const Tensor bm = layer.bias_mu.value, br = layer.bias_rho.value;
  EXPECT_LT(CheckGradient([&](Var v) {
              Tape& t = *v.tape;
              return loss(v, t.Constant(wr), t.Constant(bm), t.Constant(br));
            }, wm, 1e-6).max_relative_error, 1e-5);
  EXPECT_LT(CheckGradient([&](Var v) {
              Tape& t = *v.tape;
              return loss(t.Constant(wm), v, t.Constant(bm), t.Constant(br));
            }, wr, 1e-6).max_relative_error, 1e-5);
  EXPECT_LT(CheckGradient([&](Var v) {
              Tape& t = *v.tape;
              return loss(t.Constant(wm), t.Constant(wr), t.Constant(bm), v);
            }, br, 1e-6).max_relative_error, 1e-5);
}

TEST(VariationalLinearTest, GradientsGaussianPrior) {
  CheckLayerGradients(GaussianPrior{0.1, 0.7});
}

TEST(VariationalLinearTest, GradientsSpikeSlabPrior) {
  CheckLayerGradients(SpikeSlabPrior{0.5, 0.05, 0.3});
  CheckLayerGradients(SpikeSlabPrior{0.0, 0.05, 0.3});
}

TEST(SpikeSlabKlTest, SingleSampleMatchesEstimator) {
  // The fused op's value equals the estimator's per-draw term.
  VariationalLinear layer = MakeLayer(DefaultPrior(), 2, 2);
  CounterRng rng(8);
  const Tensor eps = NormalTensor({2, 2}, rng);
  Tape tape;
  Var kl = SpikeSlabKlSample(tape.Leaf(layer.weight_mu.value),
                             tape.Leaf(layer.weight_rho.value), eps,
                             std::get<SpikeSlabPrior>(layer.prior()));
  double ref = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double s = Softplus(layer.weight_rho.value[i]);
    const double w = layer.weight_mu.value[i] + s * eps[i];
    const double log_q = -std::log(s) - 0.5 * eps[i] * eps[i] -
                         0.5 * std::log(2 * M_PI);
    ref += log_q - PriorLogDensity(layer.prior(), w);
  }
  EXPECT_NEAR(kl.value().item(), ref, 1e-9 * std::abs(ref));
}

TEST(SpikeSlabKlTest, IdenticalGaussianIsZero) {
  VariationalLinear layer = MakeLayer(SpikeSlabPrior{0.0, 0.001, 0.3}, 2, 2);
  for (double& v : layer.weight_mu.value.mutable_data()) v = 0.0;
  const double rho = std::log(std::expm1(0.3));
  for (double& v : layer.weight_rho.value.mutable_data()) v = rho;
  for (double& v : layer.bias_rho.value.mutable_data()) v = rho;
  CounterRng rng(2);
  MonteCarloEstimate e = KlSpikeSlabMc(layer, 100000, rng);
  EXPECT_NEAR(e.mean, 0.0, 1e-9);
}

TEST(SpikeSlabKlTest, PureSlabMatchesClosedFormAndUnbiased) {
  VariationalLinear layer = MakeLayer(SpikeSlabPrior{0.0, 0.001, 0.3}, 3, 2, 5);
  for (double& v : layer.weight_rho.value.mutable_data()) v = -1.5;
  const double closed = LayerKlGaussian(layer, GaussianPrior{0.0, 0.3});
  CounterRng rng(6);
  MonteCarloEstimate big = KlSpikeSlabMc(layer, 100000, rng);
  EXPECT_LT(std::abs(big.mean - closed), 3 * big.std_error);

  double sum = 0, sq = 0;
  const int repeats = 10000;
  for (int r = 0; r < repeats; ++r) {
    const double v = KlSpikeSlabMc(layer, 1, rng).mean;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / repeats;
  const double se = std::sqrt((sq / repeats - mean * mean) / repeats);
  EXPECT_LT(std::abs(mean - big.mean), 3 * std::hypot(se, big.std_error));
  EXPECT_THROW(KlSpikeSlabMc(layer, 0, rng), PreconditionError);
}

TEST(EmbeddingTest, LookupAndOutOfVocab) {
  CounterRng rng(1);
  BayesianEmbedding emb("e", 4, 3, DefaultPrior(), rng);
  Tape tape;
  ForwardContext ctx{&tape, WeightMode::kMean};
  std::vector<std::size_t> idx = {3, 0};
  Tensor out = emb.Forward(ctx, idx).value();
  EXPECT_EQ(out.shape(), (Shape{2, 3}));
  EXPECT_EQ(out.at(0, 1), emb.mu.value.at(3, 1));
  std::vector<std::size_t> bad = {4};
  EXPECT_THROW(emb.Forward(ctx, bad), PreconditionError);
}

TEST(PosteriorPredictTest, Draws) {
  VariationalLinear layer = MakeLayer(DefaultPrior(), 2, 1);
  const Tensor x = Tensor::FromRows({{1.0, -2.0}});
  auto forward = [&](CounterRng& r) {
    Tape tape(false);
    ForwardContext ctx{&tape, WeightMode::kSample, false, &r};
    return layer.Forward(ctx, tape.Constant(x)).value();
  };
  CounterRng a(3), b(3);
  EXPECT_EQ(PosteriorPredict(forward, 1, a)[0], forward(b));

  for (double& v : layer.weight_rho.value.mutable_data()) v = -20.0;
  for (double& v : layer.bias_rho.value.mutable_data()) v = -20.0;
  CounterRng c(4);
  auto draws = PosteriorPredict(forward, 100, c);
  double lo = 1e9, hi = -1e9;
  for (const Tensor& d : draws) { lo = std::min(lo, d[0]); hi = std::max(hi, d[0]); }
  EXPECT_LT(hi - lo, 1e-6);

  for (double& v : layer.weight_rho.value.mutable_data()) v = -1.0;
  for (double& v : layer.bias_rho.value.mutable_data()) v = -1.0;
  CounterRng d(5);
  draws = PosteriorPredict(forward, 10000, d);
  double sum = 0, sq = 0;
  for (const Tensor& t : draws) { sum += t[0]; sq += t[0] * t[0]; }
  const double mean = sum / 1e4;
  const double se = std::sqrt((sq / 1e4 - mean * mean) / 1e4);
  Tape tape;
  ForwardContext mctx{&tape, WeightMode::kMean};
  const double expected = layer.Forward(mctx, tape.Constant(x)).value()[0];
  EXPECT_LT(std::abs(mean - expected), 3 * se);
  EXPECT_THROW(PosteriorPredict(forward, 0, d), PreconditionError);
}

}  // namespace
}  // namespace bvfl
