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


#ifndef BVFL_ATTACK_ATTACK_H_
#define BVFL_ATTACK_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bvfl/autodiff/parameter.h"
#include "bvfl/data/dataset.h"
#include "bvfl/federation/trainer.h"
#include "bvfl/model/model.h"

namespace bvfl {

struct AttackConfig {
  std::size_t target = 1;          // client (modality) index under attack
  double public_fraction = 0.3;    // subjects moved to the public cohort
  std::size_t decoder_epochs = 100;
  std::size_t decoder_batch = 64;
  double decoder_learning_rate = 1e-3;
  double decoder_weight_decay = 0.0;
  // Share of public pairs held out to choose the decoder's stopping epoch.
  double decoder_holdout = 0.2;
  // Distinguishability projection: subjects and sampled releases per subject.
  std::size_t projection_subjects = 8;
  std::size_t projection_draws = 25;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Disjoint public/private partition of the subjects.
struct CohortPartition {
  Dataset public_data;
  Dataset private_data;
};
CohortPartition SplitPublic(const Dataset& data, double public_fraction,
                            std::uint64_t seed);

// What the server sees of one client: released embeddings of known subjects,
// plus the release rule announced by the protocol.
struct ObservedEmbeddings {
  Tensor embeddings;
  EvalOptions release;
};

// The server's stand-in for the target client's extractor, trained in a
// shadow VFL run over public data, then matched per coordinate to the
// observed embedding distribution.
class ShadowExtractor {
 public:
  ShadowExtractor(std::unique_ptr<ModelBundle> bundle, std::size_t target);

  // Per-coordinate affine map taking shadow outputs on `public_inputs` to the
  // mean and signal variance of `observed` (announced noise removed).
  void Calibrate(const Tensor& public_inputs, const ObservedEmbeddings& observed);
  Tensor Embed(const Tensor& inputs) const;
  std::size_t width() const;
  Extractor& extractor() const { return bundle_->extractor(target_); }

 private:
  std::unique_ptr<ModelBundle> bundle_;
  std::size_t target_;
  std::vector<double> scale_;
  std::vector<double> shift_;
};

ShadowExtractor TrainShadow(const Dataset& public_data, const ModelConfig& config,
                            const TrainOptions& options, std::size_t target);

// Plain ReLU MLP mirroring the extractor: embedding -> reversed hidden widths
// -> feature width, after a fixed per-coordinate standardization of its
// inputs. Parameters are fixed once Train returns.
class Decoder {
 public:
  Decoder(std::size_t embedding_width, std::vector<std::size_t> hidden,
          std::size_t output_width, std::uint64_t seed);

  // Fits g(release(E')) ~ x' on public pairs with AdamW; noise is redrawn
  // every epoch with the announced release rule. Keeps the epoch with the
  // lowest held-out error.
  void Train(const Tensor& shadow_embeddings, const Tensor& targets,
             const EvalOptions& release, const AttackConfig& config);
  Tensor Reconstruct(const Tensor& embeddings) const;
  bool frozen() const { return frozen_; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }

 private:
  Var Forward(Tape& tape, Var x);
  Tensor Standardize(Tensor x) const;
  ParamList parameters();

  std::vector<std::size_t> widths_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
  std::vector<double> input_mean_;
  std::vector<double> input_inv_sd_;
  bool frozen_ = false;
};

// Hidden widths of the target extractor, reversed.
std::vector<std::size_t> MirrorWidths(const ModalitySpec& spec,
                                      const ModelConfig& config);

struct AttackReport {
  std::vector<double> per_feature_mse;
  double mse = 0.0;
  // Predicting the public per-feature mean for every subject.
  double mean_baseline_mse = 0.0;

  std::string ToText() const;
};

// Evaluation harness only: compares reconstructions with the truth.
AttackReport ScoreReconstruction(const Tensor& reconstruction, const Tensor& truth,
                                 const Tensor& public_features);

// Rows of `points` projected on their two leading principal components
// (component signs fixed so the largest-magnitude loading is positive).
Tensor PrincipalProjection(const Tensor& points, std::size_t components = 2);

// Mean silhouette coefficient under Euclidean distance.
double Silhouette(const Tensor& points, std::span<const std::size_t> labels);

// Repeated releases of the same subjects: fresh posterior weight draws and
// fresh release noise per draw, evaluation-mode otherwise. Subject-major rows.
struct ReleaseCloud {
  Tensor points;
  std::vector<std::size_t> labels;
};
ReleaseCloud SampleReleases(Extractor& extractor, const Tensor& inputs,
                            const EvalOptions& release, std::size_t draws,
                            std::uint64_t seed);

struct AttackOutcome {
  AttackReport report;
  double silhouette = 0.0;
  Tensor projection;  // 2 columns, subject-major
  std::vector<std::size_t> projection_labels;
  double test_cindex = 0.0;  // utility of the attacked run
};

// One attacked VFL run: train on the private cohort, capture released
// embeddings, train shadow and decoder on the public cohort, reconstruct.
AttackOutcome RunAttack(const Dataset& cohort, const ModelConfig& config,
                        const TrainOptions& options, const AttackConfig& attack);

void WriteProjection(const std::string& path, const Tensor& points);

}  // namespace bvfl

#endif  // BVFL_ATTACK_ATTACK_H_
