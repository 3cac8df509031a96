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

#include "bvfl/common/error.h"
#include "bvfl/privacy/privacy.h"

namespace bvfl {
namespace {

double Norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(ClipTest, Examples) {
  Tensor big = Tensor::FromRows({{4.0, 0.0}});
  EXPECT_NEAR(Norm(ClipL2(big, 1.0).row(0)), 4.0 / (4.0 + 1e-6), 1e-15);
  Tensor small = Tensor::FromRows({{0.3, 0.4}});
  EXPECT_EQ(ClipL2(small, 1.0), small);
  Tensor zero = Tensor::Zeros({1, 3});
  EXPECT_EQ(ClipL2(zero, 1.0), zero);
  EXPECT_THROW(ClipL2(zero, 0.0), PreconditionError);
}

TEST(ClipTest, BoundAndIdempotence) {
  CounterRng rng(1);
  Tensor v({1000, 8});
  for (double& x : v.mutable_data()) x = 3.0 * rng.Normal();
  Tensor once = ClipL2(v, 1.0);
  Tensor twice = ClipL2(once, 1.0);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    EXPECT_LE(Norm(once.row(r)), 1.0);
    for (std::size_t c = 0; c < 8; ++c) {
      EXPECT_NEAR(twice.at(r, c), once.at(r, c), 1e-6 * std::abs(once.at(r, c)));
    }
  }
}

TEST(PerturbTest, IdentityDeterminismAndScale) {
  Tensor v = Tensor::FromRows({{0.1, 0.2}});
  CounterRng a(3), b(3);
  EXPECT_EQ(Perturb(v, 0.0, 1.0, a), v);
  CounterRng c(4), d(4);
  EXPECT_EQ(Perturb(v, 0.7, 1.0, c), Perturb(v, 0.7, 1.0, d));

  CounterRng rng(5);
  Tensor z = Tensor::Zeros({100000, 1});
  Tensor n = Perturb(z, 0.8, 1.5, rng);
  double s = 0, sq = 0;
  for (double x : n.data()) { s += x; sq += x * x; }
  const double mean = s / 1e5;
  const double sd = std::sqrt(sq / 1e5 - mean * mean);
  EXPECT_NEAR(sd / (0.8 * 1.5), 1.0, 0.01);
}

TEST(PerturbTest, StreamsIndependentAcrossClientsAndRounds) {
  const std::uint64_t master = 42;
  CounterRng c0(DeriveKey(master, kStreamDpNoise, 0, 7));
  CounterRng c1(DeriveKey(master, kStreamDpNoise, 1, 7));
  CounterRng r8(DeriveKey(master, kStreamDpNoise, 0, 8));
  Tensor z = Tensor::Zeros({100000, 1});
  Tensor a = Perturb(z, 1.0, 1.0, c0);
  Tensor b = Perturb(z, 1.0, 1.0, c1);
  Tensor c = Perturb(z, 1.0, 1.0, r8);
  auto corr = [](const Tensor& x, const Tensor& y) {
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += x[i] * y[i]; sxx += x[i] * x[i]; syy += y[i] * y[i];
    }
    return sxy / std::sqrt(sxx * syy);
  };
  EXPECT_LT(std::abs(corr(a, b)), 0.01);
  EXPECT_LT(std::abs(corr(a, c)), 0.01);
}

TEST(CalibrateTest, Examples) {
  EXPECT_NEAR(CalibrateSigma(1.0, 1e-5, 0.01, 1000, 2.0), 2.1460, 1e-4);
  EXPECT_NEAR(CalibrateSigma(10.0, 1e-5, 0.01, 1000, 2.0), 0.21460, 1e-5);
  EXPECT_DOUBLE_EQ(CalibrateSigma(1.0, 1e-5, 0.01, 1000, 4.0),
                   2.0 * CalibrateSigma(1.0, 1e-5, 0.01, 1000, 2.0));
  EXPECT_THROW(CalibrateSigma(0.0, 1e-5, 0.01, 1000, 2.0), PreconditionError);
  EXPECT_THROW(CalibrateSigma(1.0, 1.0, 0.01, 1000, 2.0), PreconditionError);
}

TEST(DeltaForTest, RoundTripAndLimits) {
  for (double eps : {0.1, 0.5, 1.0, 10.0}) {
    const double sigma = CalibrateSigma(eps, 1e-5, 0.01, 1000, 2.0);
    EXPECT_NEAR(DeltaFor(eps, sigma, 1000, 0.01).delta / 1e-5, 1.0, 1e-12);
  }
  EXPECT_NEAR(DeltaFor(1.0, 1e-9, 1000, 0.01).delta, 1.0, 1e-9);
  const double s1 = CalibrateSigma(1.0, 1e-5, 0.01, 1000, 1.0);
  EXPECT_NEAR(DeltaFor(1.0, s1, 1000, 0.01).delta, std::exp(-2.8782), 1e-5);
  EXPECT_NEAR(DeltaFor(1.0, s1, 1000, 0.01).delta, 0.05623, 1e-5);
}

TEST(AccountantTest, Report) {
  PrivacyParams p{1.0, 1e-5, 0.01, 1, 1.0, 1.0};
  AccountantReport single = MakeAccountantReport(p);
  EXPECT_DOUBLE_EQ(single.moment_composed, single.moment_per_step);
  EXPECT_DOUBLE_EQ(single.sigma, CalibrateSigma(1.0, 1e-5, 0.01, 1, 1.0));

  // Fixed sigma: achieved delta grows with tau and shrinks with sigma.
  PrivacyParams fixed{1.0, 1e-5, 0.01, 100, 1.0, 1.0, 0.5};
  double prev = 0.0;
  for (std::int64_t tau : {100, 200, 400, 800}) {
    fixed.tau = tau;
    const double d = MakeAccountantReport(fixed).delta_achieved;
    EXPECT_GT(d, prev);
    prev = d;
  }
  fixed.tau = 100;
  const double lo_sigma = MakeAccountantReport(fixed).delta_achieved;
  fixed.sigma = 1.0;
  EXPECT_LT(MakeAccountantReport(fixed).delta_achieved, lo_sigma);

  const std::string text = single.ToText();
  for (const char* key : {"epsilon=", "delta_target=", "delta_achieved=",
                          "sigma=", "tau=", "p_sample=", "c2=", "lambda_star="}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(PrivacyParamsTest, Validation) {
  PrivacyParams p;
  EXPECT_NO_THROW(p.Validate());
  p.delta = 0;
  EXPECT_THROW(p.Validate(), PreconditionError);
  p = PrivacyParams{};
  p.p_sample = 1.5;
  EXPECT_THROW(p.Validate(), PreconditionError);
}

}  // namespace
}  // namespace bvfl
