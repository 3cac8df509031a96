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

#ifndef BVFL_MODEL_MODEL_H_
#define BVFL_MODEL_MODEL_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bvfl/bayes/variational.h"
#include "bvfl/model/layers.h"

namespace bvfl {

enum class ModalityKind { kDense, kClinical };

struct ModalitySpec {
  std::string name;
  ModalityKind kind = ModalityKind::kDense;
  // Dense: feature count. Clinical: categorical + continuous columns.
  std::size_t width = 0;
  // Clinical only: vocabulary size per categorical column (leading columns).
  std::vector<std::size_t> vocab;
  // Dense only.
  std::size_t hidden_layers = 3;
  std::size_t scale = 1;

  std::size_t categorical() const { return vocab.size(); }
  std::size_t continuous() const { return width - vocab.size(); }
};

struct ModelConfig {
  std::vector<ModalitySpec> modalities;
  std::size_t intervals = 30;
  std::size_t embedding_width = 512;
  std::size_t head_hidden_layers = 4;
  std::size_t head_scale = 1;
  std::size_t clinical_embedding_width = 32;
  std::size_t clinical_hidden_width = 256;
  double dropout = 0.5;
  // Nonzero: every BayesianFC hidden width (test profiles only).
  std::size_t hidden_width_override = 0;
  PriorSpec prior = DefaultPrior();
  double aux_weight = 0.05;

  void Validate() const;
};

// Client-side feature extractor f_k. Produces embedding-width rows.
class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual Var Forward(ForwardContext& ctx, const Tensor& input) = 0;
  virtual ParamList parameters() = 0;
  virtual std::vector<BatchNormLayer*> batch_norms() = 0;
  virtual const ModalitySpec& spec() const = 0;
};

class DenseExtractor : public Extractor {
 public:
  DenseExtractor(ModalitySpec spec, const ModelConfig& config,
                 CounterRng& init_rng);
  Var Forward(ForwardContext& ctx, const Tensor& input) override;
  ParamList parameters() override { return net_.parameters(); }
  std::vector<BatchNormLayer*> batch_norms() override {
    return net_.batch_norms();
  }
  const ModalitySpec& spec() const override { return spec_; }

 private:
  ModalitySpec spec_;
  BayesianFC net_;
};

// Batch-normed continuous columns and Bayesian categorical embeddings,
// concatenated, then dropout -> linear -> relu -> linear.
class ClinicalNet : public Extractor {
 public:
  ClinicalNet(ModalitySpec spec, const ModelConfig& config,
              CounterRng& init_rng);
  Var Forward(ForwardContext& ctx, const Tensor& input) override;
  ParamList parameters() override;
  std::vector<BatchNormLayer*> batch_norms() override;
  const ModalitySpec& spec() const override { return spec_; }

 private:
  ModalitySpec spec_;
  double dropout_;
  std::unique_ptr<BatchNormLayer> norm_;
  std::vector<BayesianEmbedding> embeddings_;
  VariationalLinear hidden_;
  VariationalLinear out_;
};

std::unique_ptr<Extractor> MakeExtractor(const ModalitySpec& spec,
                                         const ModelConfig& config,
                                         CounterRng& init_rng);

struct FusionOutput {
  Var hazards;  // N x p
  Var weights;  // N x M attention weights
  Var fused;    // N x embedding width
};

// Attention fusion plus prediction head and risk layer.
class FusionHead {
 public:
  FusionHead(const ModelConfig& config, CounterRng& init_rng);

  FusionOutput Forward(ForwardContext& ctx, std::span<const Var> embeddings);
  ParamList parameters();
  std::vector<BatchNormLayer*> batch_norms() { return head_.batch_norms(); }

 private:
  VariationalLinear score_;
  BayesianFC head_;
  VariationalLinear risk_;
};

// Per-modality scores (N x M), attention weights and the fused embedding.
FusionOutput AttentionFuse(std::span<const Var> embeddings, Var scores);

// Mean over modality pairs and subjects of 1 - cos(E_a, E_b); a constant 0
// when there is a single modality.
Var AuxLoss(std::span<const Var> embeddings);

// Sum of KL terms (constant 0 when empty).
Var SumTerms(Tape& tape, std::span<const Var> terms);

// nll + kl / n_train + aux_weight * aux.
Var TotalLoss(Var nll, Var kl, double n_train, Var aux, double aux_weight);
double TotalLossValue(double nll, double kl, double n_train, double aux,
                      double aux_weight = 0.05);

// All trainable state of one model: client extractors and the server head.
class ModelBundle {
 public:
  ModelBundle(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::size_t modalities() const { return extractors_.size(); }
  Extractor& extractor(std::size_t k) { return *extractors_[k]; }
  FusionHead& head() { return *head_; }

  ParamList client_parameters(std::size_t k) {
    return extractors_[k]->parameters();
  }
  ParamList server_parameters() { return head_->parameters(); }
  ParamList parameters();

  // Named tensors covering parameters and batch-norm running statistics.
  std::vector<std::pair<std::string, Tensor*>> NamedState();

 private:
  ModelConfig config_;
  std::vector<std::unique_ptr<Extractor>> extractors_;
  std::unique_ptr<FusionHead> head_;
};

// Copies of every parameter (with optimizer state) and running statistic.
struct ModelSnapshot {
  std::vector<Parameter> params;
  std::vector<ops::BatchNormStats> norms;
};
ModelSnapshot TakeSnapshot(const ParamList& params,
                           const std::vector<BatchNormLayer*>& norms);
void RestoreSnapshot(const ModelSnapshot& snap, const ParamList& params,
                     const std::vector<BatchNormLayer*>& norms);

// Binary checkpoint: "BVFL", version, grid p, modality names, named tensors
// (little-endian doubles).
struct CheckpointMeta {
  std::size_t intervals = 0;
  double t_max = 0.0;
  std::vector<std::string> modalities;
};
void SaveCheckpoint(const std::string& path, ModelBundle& bundle,
                    double t_max);
CheckpointMeta LoadCheckpoint(const std::string& path, ModelBundle& bundle);

}  // namespace bvfl

#endif  // BVFL_MODEL_MODEL_H_
