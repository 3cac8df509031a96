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

#ifndef BVFL_FEDERATION_PROTOCOL_H_
#define BVFL_FEDERATION_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bvfl/autodiff/parameter.h"
#include "bvfl/federation/transport.h"
#include "bvfl/federation/wire.h"
#include "bvfl/model/model.h"
#include "bvfl/survival/survival.h"

namespace bvfl {

inline constexpr std::string_view kStreamDpEval = "dp-noise-eval";

// What a client exposes of its embedding.
enum class Release {
  kRaw,        // defense disabled
  kClip,       // clipped, no noise
  kClipNoise,  // clipped and perturbed
  kNoise,      // perturbed without clipping
};

// Settings every party agrees on before the first round.
struct SessionConfig {
  std::uint64_t seed = 1;
  WeightMode mode = WeightMode::kSample;
  bool dp = false;
  // Release rule for training rounds when dp is set.
  Release dp_release = Release::kClipNoise;
  double sigma = 0.0;  // noise multiplier
  double clip = 1.0;   // C
  double n_train = 1.0;
  double aux_weight = 0.05;
  AdamWConfig adam;
  std::uint64_t digest = 0;
};


Var ReleaseEmbedding(Var raw, Release release, double sigma, double clip,
                     CounterRng* noise);

// One training round: its sampled subjects and the key of every stream.
struct RoundPlan {
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;
  std::uint32_t round = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> rows;  // dataset rows, drawn with replacement

  CounterRng Stream(std::string_view label, std::size_t party) const {
    return CounterRng(DeriveKey(seed, label, party, round));
  }
};

std::size_t BatchesPerEpoch(std::size_t n_train, std::size_t batch_size);
RoundPlan MakeRoundPlan(std::uint64_t seed, std::uint32_t epoch,
                        std::uint32_t batch, std::size_t batches_per_epoch,
                        std::span<const std::size_t> train_rows,
                        std::size_t batch_size);

// Client half of a training forward pass on `tape`.
struct ClientPass {
  Var released;  // what leaves the client
  Var kl;        // sum of the client's KL terms
};
ClientPass ClientForward(Extractor& extractor, Tape& tape, const Tensor& input,
                         const SessionConfig& config, std::size_t party,
                         std::uint32_t round);
// Evaluation embedding: posterior means, inference-mode layers.
Tensor ClientEvaluate(Extractor& extractor, const Tensor& input,
                      Release release, double sigma, double clip,
                      CounterRng* noise);

// Server half: fusion, hazards and the total loss.
struct ServerPass {
  Var loss;
  Var nll;
  FusionOutput output;
};
ServerPass ServerForward(FusionHead& head, Tape& tape,
                         std::span<const Var> embeddings,
                         std::span<const Var> client_kl,
                         const TargetMask& targets, const SessionConfig& config,
                         std::size_t party, std::uint32_t round);
Tensor ServerEvaluate(FusionHead& head, std::span<const Tensor> embeddings);

// Subject key -> dataset row.
class SubjectIndex {
 public:
  explicit SubjectIndex(std::span<const std::string> ids);
  // Throws ProtocolError for an unknown key.
  std::vector<std::size_t> Rows(std::span<const std::uint64_t> keys) const;
  std::vector<std::uint64_t> Keys(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::size_t> rows_;
};

// Client state machine: holds one modality slice and its extractor.
class ClientSession : public FrameHandler {
 public:
  ClientSession(std::size_t index, Extractor& extractor, const Tensor& features,
                std::span<const std::string> ids, SessionConfig config);

  EmbeddingMessage TrainRound(const ControlMessage& control);
  void ApplyGradient(const GradientMessage& message);
  EmbeddingMessage Evaluate(const ControlMessage& control);

  std::vector<Frame> Handle(const Frame& frame) override;
  bool finished() const override { return stopped_; }
  std::size_t index() const { return index_; }

 private:
  Tensor Gather(std::span<const std::uint64_t> keys) const;

  std::size_t index_;
  Extractor& extractor_;
  const Tensor& features_;
  SubjectIndex subjects_;
  SessionConfig config_;
  // Activations retained between the two halves of a round.
  std::unique_ptr<Tape> tape_;
  ClientPass pass_;
  std::uint32_t pending_round_ = 0;
  std::vector<std::uint64_t> pending_subjects_;
  ModelSnapshot best_;
  bool has_best_ = false;
  bool started_ = false;
  bool stopped_ = false;
};

// Server state: fusion head, labels and the synchronous round barrier.
class ServerSession {
 public:
  ServerSession(FusionHead& head, std::size_t clients,
                std::span<const std::string> ids, TargetMask targets,
                SessionConfig config);

  struct StepResult {
    double loss = 0.0;
    std::vector<GradientMessage> gradients;
  };
  // Requires exactly one message per client, in index order, with one round
  // number and one subject list; otherwise throws ProtocolError before any
  // parameter changes.
  StepResult Step(std::span<const EmbeddingMessage> messages);
  // Hazards for an evaluation pass.
  Tensor Hazards(std::span<const EmbeddingMessage> messages) const;

  const SubjectIndex& subjects() const { return subjects_; }

 private:
  void Validate(std::span<const EmbeddingMessage> messages) const;

  FusionHead& head_;
  std::size_t clients_;
  SubjectIndex subjects_;
  TargetMask targets_;
  SessionConfig config_;
};

}  // namespace bvfl

#endif  // BVFL_FEDERATION_PROTOCOL_H_
