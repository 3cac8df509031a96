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

#ifndef BVFL_FEDERATION_TRAINER_H_
#define BVFL_FEDERATION_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bvfl/data/dataset.h"
#include "bvfl/federation/protocol.h"
#include "bvfl/metrics/metrics.h"
#include "bvfl/model/model.h"
#include "bvfl/privacy/privacy.h"

namespace bvfl {

inline constexpr double kCentralizedLearningRate = 0.005;
inline constexpr double kVflLearningRate = 0.001;
// Evaluation-noise round used for final test-split predictions.
inline constexpr std::uint32_t kTestEvalRound = 0xfffffff0u;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_cindex = 0.0;
};

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 0.0;  // 0 picks the per-mode default
  double weight_decay = 0.01;
  std::size_t patience = 10;   // 0 disables early stopping
  WeightMode mode = WeightMode::kSample;
  bool dp = false;
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip = 1.0;
  double c2 = 1.0;
  // Centralized runs only: clip embeddings before the noise. Off by default;
  // there is no party boundary to bound sensitivity for.
  bool central_clip = false;
  std::uint64_t seed = 1;
  std::uint64_t digest = 0;
  std::function<void(const EpochRecord&)> on_epoch;
};

// How evaluation embeddings are released.
struct EvalOptions {
  Release release = Release::kRaw;
  double sigma = 0.0;
  double clip = 1.0;
  std::uint64_t seed = 1;
  std::uint32_t round = kTestEvalRound;
};

struct TrainResult {
  std::unique_ptr<ModelBundle> bundle;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double t_max = 0.0;
  std::optional<AccountantReport> accountant;
  // Release rule for this model's test-time predictions.
  EvalOptions eval;
};

// `base` with its modality list replaced by the dataset's (hidden_layers and
// scale are kept for modalities `base` already names).
ModelConfig ConfigForDataset(const Dataset& data, const ModelConfig& base);
// Largest training-split time; the grid horizon.
double GridHorizon(const Dataset& data);
PrivacyParams PrivacyFor(const TrainOptions& options, std::size_t n_train);
SessionConfig MakeSessionConfig(const TrainOptions& options,
                                const ModelConfig& config, std::size_t n_train,
                                double default_lr);

// One process, one joined autodiff graph per step.
TrainResult RunCentralizedTraining(const Dataset& data, const ModelConfig& config,
                                   const TrainOptions& options);
// Clients and server in one process over in-process channels.
TrainResult RunVflTraining(const Dataset& data, const ModelConfig& config,
                           const TrainOptions& options);
// Server side over connected channels, one per client in index order. Only
// the label columns of `labels` are read. The returned bundle holds the
// trained server head; client extractors stay with the clients.
TrainResult RunVflServer(const Dataset& labels, const ModelConfig& config,
                         const TrainOptions& options,
                         std::span<Channel* const> channels);
// Client side session for modality `k` of `data`.
struct ClientRuntime {
  std::unique_ptr<ModelBundle> bundle;
  std::unique_ptr<ClientSession> session;
};
ClientRuntime MakeClient(const Dataset& data, const ModelConfig& config,
                         const TrainOptions& options, std::size_t k);

Tensor PredictHazards(ModelBundle& bundle, const Dataset& data,
                      std::span<const std::size_t> rows, const EvalOptions& eval);
MetricsReport EvaluateSplit(ModelBundle& bundle, const Dataset& data, Split split,
                            double t_max, const EvalOptions& eval);

// Tab-separated: epoch, train_loss, val_loss, val_cindex.
void WriteHistory(const std::string& path, std::span<const EpochRecord> history);
std::vector<EpochRecord> ReadHistory(const std::string& path);

}  // namespace bvfl

#endif  // BVFL_FEDERATION_TRAINER_H_
