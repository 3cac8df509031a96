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

#include "bvfl/federation/protocol.h"

#include <algorithm>

#include "bvfl/autodiff/adamw.h"
#include "bvfl/autodiff/ops.h"
#include "bvfl/common/error.h"
#include "bvfl/data/dataset.h"
#include "bvfl/privacy/privacy.h"

namespace bvfl {
namespace {

Tensor GatherRows(const Tensor& m, std::span<const std::size_t> rows) {
  Tensor out({rows.size(), m.cols()});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(m.row(rows[r]).begin(), m.cols(), out.mutable_row(r).begin());
  }
  return out;
}

}  // namespace

Var ReleaseEmbedding(Var raw, Release release, double sigma, double clip,
                     CounterRng* noise) {
  if (release == Release::kRaw) return raw;
  Var clipped = release == Release::kNoise ? raw : ClipL2Rows(raw, clip);
  if (release == Release::kClip || sigma == 0.0) return clipped;
  if (noise == nullptr) throw ContractError("perturbation needs a noise stream");
  Tensor noisy = Perturb(clipped.value(), sigma, clip, *noise);
  // Additive noise: the gradient passes through unchanged.
  return raw.tape->Record(std::move(noisy), {clipped}, [](BackwardContext& ctx) {
    auto gx = ctx.input_grad(0);
    const auto g = ctx.grad_out();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
  });
}

std::size_t BatchesPerEpoch(std::size_t n_train, std::size_t batch_size) {
  if (n_train == 0 || batch_size == 0) {
    throw PreconditionError("empty training set or zero batch size");
  }
  return (n_train + batch_size - 1) / batch_size;
}

RoundPlan MakeRoundPlan(std::uint64_t seed, std::uint32_t epoch,
                        std::uint32_t batch, std::size_t batches_per_epoch,
                        std::span<const std::size_t> train_rows,
                        std::size_t batch_size) {
  if (train_rows.empty()) throw PreconditionError("no training subjects");
  RoundPlan plan;
  plan.epoch = epoch;
  plan.batch = batch;
  plan.round = static_cast<std::uint32_t>(epoch * batches_per_epoch + batch);
  plan.seed = seed;
  CounterRng rng = plan.Stream(kStreamBatch, 0);
  plan.rows.resize(batch_size);
  for (std::size_t& r : plan.rows) r = train_rows[rng.UniformIndex(train_rows.size())];
  return plan;
}

ClientPass ClientForward(Extractor& extractor, Tape& tape, const Tensor& input,
                         const SessionConfig& config, std::size_t party,
                         std::uint32_t round) {
  CounterRng bayes(DeriveKey(config.seed, kStreamBayes, party, round));
  CounterRng dropout(DeriveKey(config.seed, kStreamDropout, party, round));
  CounterRng noise(DeriveKey(config.seed, kStreamDpNoise, party, round));
  std::vector<Var> terms;
  ForwardContext ctx{&tape, config.mode, true, &bayes, &dropout, &terms};
  Var raw = extractor.Forward(ctx, input);
  Var kl = SumTerms(tape, terms);
  Var released = ReleaseEmbedding(
      raw, config.dp ? config.dp_release : Release::kRaw, config.sigma,
      config.clip, &noise);
  return {released, kl};
}

Tensor ClientEvaluate(Extractor& extractor, const Tensor& input,
                      Release release, double sigma, double clip,
                      CounterRng* noise) {
  Tape tape(false);
  ForwardContext ctx{&tape, WeightMode::kMean, false, nullptr, nullptr, nullptr};
  Var raw = extractor.Forward(ctx, input);
  return ReleaseEmbedding(raw, release, sigma, clip, noise).value();
}

ServerPass ServerForward(FusionHead& head, Tape& tape,
                         std::span<const Var> embeddings,
                         std::span<const Var> client_kl,
                         const TargetMask& targets, const SessionConfig& config,
                         std::size_t party, std::uint32_t round) {
  if (client_kl.size() != embeddings.size() || embeddings.empty()) {
    throw PreconditionError("one KL value per client embedding required");
  }
  CounterRng bayes(DeriveKey(config.seed, kStreamBayes, party, round));
  CounterRng dropout(DeriveKey(config.seed, kStreamDropout, party, round));
  std::vector<Var> terms;
  ForwardContext ctx{&tape, config.mode, true, &bayes, &dropout, &terms};
  ServerPass pass;
  pass.output = head.Forward(ctx, embeddings);
  pass.nll = NllLoss(pass.output.hazards, targets);
  Var aux = AuxLoss(embeddings);
  // Client KLs in index order, then the server's own.
  Var kl = client_kl[0];
  for (std::size_t k = 1; k < client_kl.size(); ++k) kl = ops::Add(kl, client_kl[k]);
  kl = ops::Add(kl, SumTerms(tape, terms));
  pass.loss = TotalLoss(pass.nll, kl, config.n_train, aux, config.aux_weight);
  return pass;
}

Tensor ServerEvaluate(FusionHead& head, std::span<const Tensor> embeddings) {
  Tape tape(false);
  std::vector<Var> leaves;
  for (const Tensor& e : embeddings) leaves.push_back(tape.Constant(e));
  ForwardContext ctx{&tape, WeightMode::kMean, false, nullptr, nullptr, nullptr};
  return head.Forward(ctx, leaves).hazards.value();
}

SubjectIndex::SubjectIndex(std::span<const std::string> ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::uint64_t key = SubjectKey(ids[i]);
    if (!rows_.emplace(key, i).second) {
      throw DataError("subject key collision or duplicate id: " + ids[i]);
    }
    keys_.push_back(key);
  }
}

std::vector<std::size_t> SubjectIndex::Rows(std::span<const std::uint64_t> keys) const {
  std::vector<std::size_t> out;
  out.reserve(keys.size());
  for (std::uint64_t k : keys) {
    const auto it = rows_.find(k);
    if (it == rows_.end()) throw ProtocolError("unknown subject id " + std::to_string(k));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::uint64_t> SubjectIndex::Keys(std::span<const std::size_t> rows) const {
  std::vector<std::uint64_t> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(keys_.at(r));
  return out;
}

ClientSession::ClientSession(std::size_t index, Extractor& extractor,
                             const Tensor& features,
                             std::span<const std::string> ids,
                             SessionConfig config)
    : index_(index),
      extractor_(extractor),
      features_(features),
      subjects_(ids),
      config_(config) {
  if (features.rows() != ids.size()) {
    throw DimensionError("client features must have one row per subject");
  }
}

Tensor ClientSession::Gather(std::span<const std::uint64_t> keys) const {
  if (keys.empty()) throw ProtocolError("round without subjects");
  return GatherRows(features_, subjects_.Rows(keys));
}

EmbeddingMessage ClientSession::TrainRound(const ControlMessage& control) {
  if (control.command != Command::kTrainRound) {
    throw ProtocolError("expected a training round command");
  }
  const Tensor input = Gather(control.subjects);
  tape_ = std::make_unique<Tape>();
  pass_ = ClientForward(extractor_, *tape_, input, config_, index_, control.round);
  pending_round_ = control.round;
  pending_subjects_ = control.subjects;
  return {control.round, static_cast<std::uint16_t>(index_), control.subjects,
          pass_.released.value(), pass_.kl.value().item()};
}

void ClientSession::ApplyGradient(const GradientMessage& message) {
  if (!tape_ || message.round != pending_round_) {
    throw ProtocolError("gradient for round " + std::to_string(message.round) +
                        " does not match a pending round");
  }
  if (message.client != index_ || message.subjects != pending_subjects_) {
    throw ProtocolError("gradient addressed to the wrong client or subjects");
  }
  if (!message.gradients.SameShape(pass_.released.value())) {
    throw ProtocolError("gradient shape does not mirror the embedding");
  }
  std::vector<Seed> seeds{{pass_.released, message.gradients}};
  if (tape_->requires_grad(pass_.kl)) {
    seeds.push_back({pass_.kl, Tensor::Scalar(1.0 / config_.n_train)});
  }
  const Gradients grads = tape_->Backward(seeds);
  ApplyAdamW(extractor_.parameters(), *tape_, grads, config_.adam);
  tape_.reset();
  pending_subjects_.clear();
}

EmbeddingMessage ClientSession::Evaluate(const ControlMessage& control) {
  const Tensor input = Gather(control.subjects);
  CounterRng noise(DeriveKey(config_.seed, kStreamDpEval, index_, control.round));
  Tensor e = ClientEvaluate(extractor_, input,
                            config_.dp ? config_.dp_release : Release::kRaw,
                            config_.sigma, config_.clip, &noise);
  return {control.round, static_cast<std::uint16_t>(index_), control.subjects,
          std::move(e), 0.0};
}

std::vector<Frame> ClientSession::Handle(const Frame& frame) {
  if (stopped_) throw ProtocolError("client already stopped");
  if (frame.type == FrameType::kGradient) {
    ApplyGradient(GradientFromFrame(frame));
    return {};
  }
  const ControlMessage c = ControlFromFrame(frame);
  if (c.command != Command::kStart && !started_) {
    throw ProtocolError("command before session start");
  }
  ControlMessage ack;
  ack.command = Command::kAck;
  ack.round = c.round;
  ack.client = static_cast<std::uint16_t>(index_);
  switch (c.command) {
    case Command::kStart:
      if (c.digest != config_.digest) {
        throw ProtocolError("config digest mismatch between server and client");
      }
      started_ = true;
      ack.digest = config_.digest;
      return {ToFrame(ack)};
    case Command::kTrainRound:
      return ToFrames(TrainRound(c));
    case Command::kEvaluate:
      return ToFrames(Evaluate(c));
    case Command::kSnapshot:
      best_ = TakeSnapshot(extractor_.parameters(), extractor_.batch_norms());
      has_best_ = true;
      return {};
    case Command::kRestore:
      if (has_best_) {
        RestoreSnapshot(best_, extractor_.parameters(), extractor_.batch_norms());
      }
      return {};
    case Command::kStop:
      stopped_ = true;
      return {ToFrame(ack)};
    default:
      throw ProtocolError("unexpected command at client");
  }
}

ServerSession::ServerSession(FusionHead& head, std::size_t clients,
                             std::span<const std::string> ids,
                             TargetMask targets, SessionConfig config)
    : head_(head),
      clients_(clients),
      subjects_(ids),
      targets_(std::move(targets)),
      config_(config) {
  if (clients == 0) throw PreconditionError("server needs at least one client");
}

void ServerSession::Validate(std::span<const EmbeddingMessage> messages) const {
  if (messages.size() != clients_) {
    throw ProtocolError("expected " + std::to_string(clients_) +
                        " embedding messages, got " + std::to_string(messages.size()));
  }
  for (std::size_t k = 0; k < messages.size(); ++k) {
    const EmbeddingMessage& m = messages[k];
    if (m.client != k) throw ProtocolError("embedding messages out of client order");
    if (m.round != messages[0].round) throw ProtocolError("round number mismatch");
    if (m.subjects != messages[0].subjects) throw ProtocolError("subject index mismatch");
    if (m.embeddings.ndim() != 2 || m.embeddings.rows() != m.subjects.size() ||
        m.embeddings.cols() != messages[0].embeddings.cols()) {
      throw ProtocolError("malformed embedding payload");
    }
  }
}

ServerSession::StepResult ServerSession::Step(
    std::span<const EmbeddingMessage> messages) {
  Validate(messages);
  const std::vector<std::size_t> rows = subjects_.Rows(messages[0].subjects);
  const TargetMask targets = SelectTargets(targets_, rows);
  Tape tape;
  std::vector<Var> leaves, kls;
  for (const EmbeddingMessage& m : messages) {
    leaves.push_back(tape.Leaf(m.embeddings));
    kls.push_back(tape.Constant(Tensor::Scalar(m.kl)));
  }
  const ServerPass pass = ServerForward(head_, tape, leaves, kls, targets, config_,
                                        clients_, messages[0].round);
  const Gradients grads = tape.Backward(pass.loss);
  ApplyAdamW(head_.parameters(), tape, grads, config_.adam);
  StepResult out;
  out.loss = pass.loss.value().item();
  for (std::size_t k = 0; k < messages.size(); ++k) {
    out.gradients.push_back({messages[k].round, messages[k].client,
                             messages[k].subjects, grads.Get(leaves[k])});
  }
  return out;
}

Tensor ServerSession::Hazards(std::span<const EmbeddingMessage> messages) const {
  Validate(messages);
  subjects_.Rows(messages[0].subjects);
  std::vector<Tensor> e;
  for (const EmbeddingMessage& m : messages) e.push_back(m.embeddings);
  return ServerEvaluate(head_, e);
}

}  // namespace bvfl
