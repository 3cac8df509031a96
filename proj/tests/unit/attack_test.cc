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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "bvfl/attack/attack.h"
#include "bvfl/common/error.h"

namespace bvfl {
namespace {

Dataset SmallCohort(std::size_t n, std::uint64_t seed) {
  CohortSpec s = DefaultCohortSpec(true);
  s.subjects = n;
  s.seed = seed;
  s.modalities.pop_back();  // clinical + mirna
  s.modalities[1].width = 24;
  return GenerateCohort(s);
}

ModelConfig SmallModel() {
  ModelConfig c;
  c.embedding_width = 32;
  c.hidden_width_override = 32;
  c.clinical_hidden_width = 32;
  c.clinical_embedding_width = 8;
  c.head_hidden_layers = 2;
  ModalitySpec mirna{"mirna", ModalityKind::kDense, 24};
  mirna.hidden_layers = 2;
  c.modalities = {mirna};
  return c;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(SilhouetteTest, HandComputedExample) {
  const Tensor p({4, 2}, {0, 0, 1, 0, 4, 0, 5, 0});
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  EXPECT_NEAR(Silhouette(p, labels), 94.0 / 126.0, 1e-12);
  const std::vector<std::size_t> one{0, 0, 0, 0};
  EXPECT_THROW(Silhouette(p, one), PreconditionError);
  const std::vector<std::size_t> short_labels{0, 1};
  EXPECT_THROW(Silhouette(p, short_labels), DimensionError);
}

TEST(SilhouetteTest, SingletonClustersScoreZero) {
  const Tensor p({3, 2}, {0, 0, 1, 0, 9, 0});
  const std::vector<std::size_t> labels{0, 0, 1};
  // Points 0 and 1: a = 1, b = 9 and 8.
  EXPECT_NEAR(Silhouette(p, labels), ((1 - 1.0 / 9) + (1 - 1.0 / 8)) / 3.0, 1e-12);
}

TEST(ProjectionTest, RecoversDominantDirection) {
  Tensor p({5, 3});
  for (std::size_t i = 0; i < 5; ++i) {
    const double t = static_cast<double>(i) - 2.0;
    p.at(i, 0) = 2 * t + 1;
    p.at(i, 1) = -t;
    p.at(i, 2) = 3.0;
  }
  const Tensor q = PrincipalProjection(p);
  ASSERT_EQ(q.cols(), 2u);
  const double s = std::sqrt(5.0);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(q.at(i, 0), (static_cast<double>(i) - 2.0) * s, 1e-10);
    EXPECT_NEAR(q.at(i, 1), 0.0, 1e-10);
  }
  EXPECT_EQ(PrincipalProjection(p).data()[0], q.data()[0]);
  EXPECT_THROW(PrincipalProjection(Tensor({1, 3})), PreconditionError);
}

TEST(PartitionTest, DisjointAndDeterministic) {
  const Dataset d = SmallCohort(200, 2);
  const CohortPartition a = SplitPublic(d, 0.3, 5);
  const CohortPartition b = SplitPublic(d, 0.3, 5);
  EXPECT_EQ(a.public_data.size(), 60u);
  EXPECT_EQ(a.private_data.size(), 140u);
  EXPECT_EQ(a.public_data.ids, b.public_data.ids);
  for (const std::string& id : a.public_data.ids) {
    EXPECT_EQ(std::count(a.private_data.ids.begin(), a.private_data.ids.end(), id), 0);
  }
  EXPECT_EQ(a.public_data.modalities.size(), d.modalities.size());
  EXPECT_THROW(SplitPublic(d, 0.0, 1), PreconditionError);
  EXPECT_THROW(SplitPublic(d, 1.0, 1), PreconditionError);
}

TEST(DecoderTest, IdentityEmbeddingIsInvertedAlmostExactly) {
  CounterRng rng(3);
  const Tensor x = NormalTensor({256, 6}, rng);
  Decoder g(6, {16}, 6, 4);
  AttackConfig c;
  c.decoder_epochs = 400;
  c.decoder_learning_rate = 5e-3;
  g.Train(x, x, EvalOptions{}, c);
  const AttackReport r = ScoreReconstruction(g.Reconstruct(x), x, x);
  EXPECT_LT(r.mse, 0.01 * r.mean_baseline_mse);
  EXPECT_TRUE(g.frozen());
  EXPECT_THROW(g.Train(x, x, EvalOptions{}, c), ContractError);
}

TEST(DecoderTest, PureNoiseInputsFallBackToThePublicMean) {
  CounterRng rng(6);
  Tensor x = NormalTensor({300, 4}, rng);
  for (std::size_t i = 0; i < x.rows(); ++i) x.at(i, 1) += 0.5;
  EvalOptions drown;
  drown.release = Release::kClipNoise;
  drown.sigma = 50.0;
  Decoder g(4, {8}, 4, 1);
  AttackConfig c;
  c.decoder_epochs = 300;
  g.Train(x, x, drown, c);
  CounterRng noise(9);
  const Tensor seen = Perturb(ClipL2(x, 1.0), 50.0, 1.0, noise);
  const AttackReport r = ScoreReconstruction(g.Reconstruct(seen), x, x);
  EXPECT_NEAR(r.mse, r.mean_baseline_mse, 0.1 * r.mean_baseline_mse);
}

TEST(DecoderTest, ShapeErrors) {
  Decoder g(3, {4, 5}, 2, 1);
  EXPECT_EQ(g.input_width(), 3u);
  EXPECT_EQ(g.output_width(), 2u);
  EXPECT_THROW(g.Reconstruct(Tensor({2, 4})), DimensionError);
  AttackConfig c;
  EXPECT_THROW(g.Train(Tensor({2, 3}), Tensor({3, 2}), EvalOptions{}, c), DimensionError);
  EXPECT_THROW(ScoreReconstruction(Tensor({2, 2}), Tensor({2, 3}), Tensor({2, 3})),
               DimensionError);
}

TEST(MirrorWidthsTest, ReversesTheExtractor) {
  ModelConfig c;
  ModalitySpec dense{"x", ModalityKind::kDense, 100};
  dense.hidden_layers = 3;
  EXPECT_EQ(MirrorWidths(dense, c), (std::vector<std::size_t>{128, 128, 128}));
  c.hidden_width_override = 7;
  EXPECT_EQ(MirrorWidths(dense, c), (std::vector<std::size_t>{7, 7, 7}));
  ModalitySpec clin{"c", ModalityKind::kClinical, 3, {2, 2}};
  EXPECT_EQ(MirrorWidths(clin, c), (std::vector<std::size_t>{c.clinical_hidden_width}));
}

TEST(ShadowTest, MatchesClientEmbeddingMomentsOnHeldOutPublicData) {
  const Dataset d = SmallCohort(600, 4);
  const ModelConfig cfg = ConfigForDataset(d, SmallModel());
  TrainOptions o;
  o.epochs = 6;
  o.seed = 4;
  const CohortPartition part = SplitPublic(d, 0.3, 4);
  TrainResult real = RunVflTraining(part.private_data, cfg, o);
  Extractor& client = real.bundle->extractor(1);
  ObservedEmbeddings seen;
  seen.embeddings = ClientEvaluate(client, part.private_data.modalities[1].features,
                                   Release::kRaw, 0, 1, nullptr);
  seen.release = real.eval;
  ShadowExtractor shadow = TrainShadow(part.public_data, cfg, o, 1);
  EXPECT_EQ(shadow.width(), cfg.embedding_width);
  const std::vector<std::size_t> train = part.public_data.Indices(Split::kTrain);
  std::vector<std::size_t> held = part.public_data.Indices(Split::kVal);
  const std::vector<std::size_t> test = part.public_data.Indices(Split::kTest);
  held.insert(held.end(), test.begin(), test.end());
  shadow.Calibrate(part.public_data.Rows(1, train), seen);
  const Tensor xs = part.public_data.Rows(1, held);
  const Tensor es = shadow.Embed(xs);
  const Tensor ec = ClientEvaluate(client, xs, Release::kRaw, 0, 1, nullptr);
  std::vector<double> mean_err, sd_err;
  for (std::size_t j = 0; j < es.cols(); ++j) {
    double ms = 0, mc = 0, vs = 0, vc = 0;
    const auto n = static_cast<double>(es.rows());
    for (std::size_t i = 0; i < es.rows(); ++i) {
      ms += es.at(i, j) / n;
      mc += ec.at(i, j) / n;
    }
    for (std::size_t i = 0; i < es.rows(); ++i) {
      vs += std::pow(es.at(i, j) - ms, 2) / n;
      vc += std::pow(ec.at(i, j) - mc, 2) / n;
    }
    mean_err.push_back(std::abs(ms - mc) / std::sqrt(vc));
    sd_err.push_back(std::abs(std::sqrt(vs) - std::sqrt(vc)) / std::sqrt(vc));
  }
  EXPECT_LT(Median(mean_err), 0.2);
  EXPECT_LT(Median(sd_err), 0.2);
}

TEST(AttackPipelineTest, NoiseDefeatsReconstructionAndMseIsMonotoneInEpsilon) {
  const std::vector<double> eps{0.5, 1.0, 1.5, 10.0, 0.0};  // 0: no DP
  std::vector<std::vector<double>> ratios(eps.size());
  std::vector<double> sil_clean, sil_noisy;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = SmallCohort(500, seed);
    for (std::size_t e = 0; e < eps.size(); ++e) {
      TrainOptions o;
      o.epochs = 5;
      o.seed = seed;
      o.dp = eps[e] > 0;
      if (o.dp) o.epsilon = eps[e];
      AttackConfig a;
      a.seed = seed;
      a.decoder_epochs = 40;
      const AttackOutcome r = RunAttack(d, SmallModel(), o, a);
      ratios[e].push_back(r.report.mse / r.report.mean_baseline_mse);
      if (eps[e] == 0.0) sil_clean.push_back(r.silhouette);
      if (eps[e] == 0.5) sil_noisy.push_back(r.silhouette);
    }
  }
  std::vector<double> med;
  for (const auto& r : ratios) med.push_back(Median(r));
  for (std::size_t e = 0; e + 1 < med.size(); ++e) {
    EXPECT_GE(med[e], med[e + 1] - 0.02) << "epsilon " << eps[e] << " vs " << eps[e + 1];
  }
  EXPECT_GE(med[0], 1.2 * med.back());
  EXPECT_GT(Median(sil_clean), 0.5);
  EXPECT_LT(Median(sil_noisy), 0.1);
}

TEST(AttackPipelineTest, ProjectionFileHasTwoNumericColumns) {
  const Tensor p({3, 2}, {1, 2, 3.5, -4, 0, 0});
  const std::string path =
      (std::filesystem::temp_directory_path() / "bvfl_projection.txt").string();
  WriteProjection(path, p);
  std::ifstream in(path);
  double a, b;
  std::size_t rows = 0;
  while (in >> a >> b) {
    EXPECT_EQ(a, p.at(rows, 0));
    EXPECT_EQ(b, p.at(rows, 1));
    ++rows;
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_THROW(WriteProjection(path, Tensor({2, 3})), DimensionError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bvfl
