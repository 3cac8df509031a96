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

#include "bvfl/model/model.h"

#include <cmath>
#include <fstream>
#include <iterator>

#include "bvfl/autodiff/ops.h"
#include "bvfl/common/bytes.h"
#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr char kCheckpointMagic[] = "BVFL";
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::size_t> ColumnIndices(const Tensor& input, std::size_t col,
                                       std::size_t vocab) {
  std::vector<std::size_t> idx(input.rows());
  for (std::size_t r = 0; r < input.rows(); ++r) {
    const double v = input.at(r, col);
    if (!(v >= 0) || v != std::floor(v) || v >= static_cast<double>(vocab)) {
      throw PreconditionError("categorical value " + std::to_string(v) +
                              " outside vocabulary of size " +
                              std::to_string(vocab));
    }
    idx[r] = static_cast<std::size_t>(v);
  }
  return idx;
}

void CheckInput(const Tensor& input, const ModalitySpec& spec) {
  if (input.ndim() != 2 || input.cols() != spec.width) {
    throw DimensionError(spec.name + ": expected N x " +
                         std::to_string(spec.width) + " input, got " +
                         ShapeToString(input.shape()));
  }
}

}  // namespace

void ModelConfig::Validate() const {
  if (modalities.empty()) throw PreconditionError("model needs a modality");
  if (intervals == 0 || embedding_width == 0) {
    throw PreconditionError("model widths must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw PreconditionError("dropout must be in [0, 1)");
  }
  ValidatePrior(prior);
  for (const ModalitySpec& m : modalities) {
    if (m.width == 0) throw PreconditionError(m.name + ": zero width");
    if (m.kind == ModalityKind::kClinical && m.vocab.size() > m.width) {
      throw PreconditionError(m.name + ": more categorical columns than width");
    }
    for (std::size_t v : m.vocab) {
      if (v == 0) throw PreconditionError(m.name + ": empty vocabulary");
    }
  }
}

DenseExtractor::DenseExtractor(ModalitySpec spec, const ModelConfig& config,
                               CounterRng& init_rng)
    : spec_(std::move(spec)),
      net_(spec_.name, spec_.width, spec_.hidden_layers, spec_.scale,
           config.embedding_width, config.dropout, config.prior, init_rng,
           config.hidden_width_override) {}

Var DenseExtractor::Forward(ForwardContext& ctx, const Tensor& input) {
  CheckInput(input, spec_);
  return net_.Forward(ctx, ctx.tape->Constant(input));
}

ClinicalNet::ClinicalNet(ModalitySpec spec, const ModelConfig& config,
                         CounterRng& init_rng)
    : spec_(std::move(spec)),
      dropout_(config.dropout),
      hidden_(spec_.name + ".hidden",
              spec_.continuous() +
                  spec_.categorical() * config.clinical_embedding_width,
              config.clinical_hidden_width, config.prior, init_rng),
      out_(spec_.name + ".out", config.clinical_hidden_width,
           config.embedding_width, config.prior, init_rng) {
  if (spec_.continuous() > 0) {
    norm_ = std::make_unique<BatchNormLayer>(spec_.name + ".bn",
                                             spec_.continuous());
  }
  for (std::size_t j = 0; j < spec_.categorical(); ++j) {
    embeddings_.emplace_back(spec_.name + ".emb" + std::to_string(j),
                             spec_.vocab[j], config.clinical_embedding_width,
                             config.prior, init_rng);
  }
}

Var ClinicalNet::Forward(ForwardContext& ctx, const Tensor& input) {
  CheckInput(input, spec_);
  Tape& tape = *ctx.tape;
  std::vector<Var> parts;
  if (norm_) {
    Var cont = ops::SliceCols(tape.Constant(input), spec_.categorical(),
                              spec_.width);
    parts.push_back(norm_->Forward(ctx, cont));
  }
  for (std::size_t j = 0; j < embeddings_.size(); ++j) {
    const std::vector<std::size_t> idx =
        ColumnIndices(input, j, spec_.vocab[j]);
    parts.push_back(embeddings_[j].Forward(ctx, idx));
  }
  Var x = parts.size() == 1 ? parts[0] : ops::ConcatCols(parts);
  if (ctx.training && dropout_ > 0.0) {
    if (ctx.dropout_rng == nullptr) {
      throw ContractError("training forward needs a dropout stream");
    }
    x = ops::Dropout(x, dropout_, *ctx.dropout_rng, true);
  }
  x = ops::Relu(hidden_.Forward(ctx, x));
  return out_.Forward(ctx, x);
}

ParamList ClinicalNet::parameters() {
  ParamList out;
  if (norm_) {
    for (Parameter* p : norm_->parameters()) out.push_back(p);
  }
  for (auto& e : embeddings_) {
    for (Parameter* p : e.parameters()) out.push_back(p);
  }
  for (Parameter* p : hidden_.parameters()) out.push_back(p);
  for (Parameter* p : out_.parameters()) out.push_back(p);
  return out;
}

std::vector<BatchNormLayer*> ClinicalNet::batch_norms() {
  if (!norm_) return {};
  return {norm_.get()};
}

std::unique_ptr<Extractor> MakeExtractor(const ModalitySpec& spec,
                                         const ModelConfig& config,
                                         CounterRng& init_rng) {
  if (spec.kind == ModalityKind::kClinical) {
    return std::make_unique<ClinicalNet>(spec, config, init_rng);
  }
  return std::make_unique<DenseExtractor>(spec, config, init_rng);
}

FusionOutput AttentionFuse(std::span<const Var> embeddings, Var scores) {
  if (embeddings.empty()) throw PreconditionError("fusion needs a modality");
  const std::size_t m = embeddings.size();
  if (scores.value().ndim() != 2 || scores.value().cols() != m) {
    throw DimensionError("fusion scores must be N x M");
  }
  Var alpha = ops::Softmax(scores, 1);
  Var z;
  for (std::size_t k = 0; k < m; ++k) {
    Var term = ops::ScaleRows(embeddings[k], ops::SliceCols(alpha, k, k + 1));
    z = k == 0 ? term : ops::Add(z, term);
  }
  return FusionOutput{Var{}, alpha, z};
}

FusionHead::FusionHead(const ModelConfig& config, CounterRng& init_rng)
    : score_("server.score", config.embedding_width, 1, config.prior, init_rng),
      head_("server.head", config.embedding_width, config.head_hidden_layers,
            config.head_scale, config.embedding_width, config.dropout,
            config.prior, init_rng, config.hidden_width_override),
      risk_("server.risk", config.embedding_width, config.intervals,
            config.prior, init_rng) {}

FusionOutput FusionHead::Forward(ForwardContext& ctx,
                                 std::span<const Var> embeddings) {
  // One draw of the shared score layer scores every modality.
  const VariationalLinear::Weights w = score_.SampleWeights(ctx);
  std::vector<Var> scores;
  for (const Var& e : embeddings) {
    scores.push_back(ops::Tanh(ops::AddRow(ops::MatMul(e, w.weight), w.bias)));
  }
  Var s = scores.size() == 1 ? scores[0] : ops::ConcatCols(scores);
  FusionOutput out = AttentionFuse(embeddings, s);
  Var h = head_.Forward(ctx, out.fused);
  out.hazards = ops::Sigmoid(risk_.Forward(ctx, h));
  return out;
}

ParamList FusionHead::parameters() {
  ParamList out = score_.parameters();
  for (Parameter* p : head_.parameters()) out.push_back(p);
  for (Parameter* p : risk_.parameters()) out.push_back(p);
  return out;
}

Var AuxLoss(std::span<const Var> embeddings) {
  if (embeddings.empty()) throw PreconditionError("aux loss needs a modality");
  Tape& tape = *embeddings[0].tape;
  if (embeddings.size() == 1) return tape.Constant(Tensor::Scalar(0.0));
  Var total;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < embeddings.size(); ++a) {
    for (std::size_t b = a + 1; b < embeddings.size(); ++b) {
      Var s = ops::Sum(ops::CosineRows(embeddings[a], embeddings[b]));
      total = pairs == 0 ? s : ops::Add(total, s);
      ++pairs;
    }
  }
  const double count =
      static_cast<double>(pairs) * static_cast<double>(embeddings[0].value().rows());
  // mean(1 - cos) = 1 - sum(cos) / count
  return ops::Add(tape.Constant(Tensor::Scalar(1.0)),
                  ops::Scale(total, -1.0 / count));
}

Var SumTerms(Tape& tape, std::span<const Var> terms) {
  if (terms.empty()) return tape.Constant(Tensor::Scalar(0.0));
  Var total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) total = ops::Add(total, terms[i]);
  return total;
}

Var TotalLoss(Var nll, Var kl, double n_train, Var aux, double aux_weight) {
  if (!(n_train >= 1)) throw PreconditionError("N_t must be >= 1");
  return ops::Add(ops::Add(nll, ops::Scale(kl, 1.0 / n_train)),
                  ops::Scale(aux, aux_weight));
}

double TotalLossValue(double nll, double kl, double n_train, double aux,
                      double aux_weight) {
  if (!(n_train >= 1)) throw PreconditionError("N_t must be >= 1");
  return nll + kl * (1.0 / n_train) + aux * aux_weight;
}

ModelBundle::ModelBundle(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.Validate();
  for (std::size_t k = 0; k < config_.modalities.size(); ++k) {
    CounterRng init(DeriveKey(seed, kStreamInit, k, 0));
    extractors_.push_back(MakeExtractor(config_.modalities[k], config_, init));
  }
  CounterRng init(DeriveKey(seed, kStreamInit, config_.modalities.size(), 0));
  head_ = std::make_unique<FusionHead>(config_, init);
}

ParamList ModelBundle::parameters() {
  ParamList out;
  for (std::size_t k = 0; k < extractors_.size(); ++k) {
    for (Parameter* p : extractors_[k]->parameters()) out.push_back(p);
  }
  for (Parameter* p : head_->parameters()) out.push_back(p);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> ModelBundle::NamedState() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (Parameter* p : parameters()) out.emplace_back(p->name, &p->value);
  auto add_norms = [&](std::vector<BatchNormLayer*> norms) {
    for (BatchNormLayer* n : norms) {
      out.emplace_back(n->gamma.name + ".running_mean", &n->stats.running_mean);
      out.emplace_back(n->gamma.name + ".running_var", &n->stats.running_var);
    }
  };
  for (auto& e : extractors_) add_norms(e->batch_norms());
  add_norms(head_->batch_norms());
  return out;
}

ModelSnapshot TakeSnapshot(const ParamList& params,
                           const std::vector<BatchNormLayer*>& norms) {
  ModelSnapshot s;
  for (const Parameter* p : params) s.params.push_back(*p);
  for (const BatchNormLayer* n : norms) s.norms.push_back(n->stats);
  return s;
}

void RestoreSnapshot(const ModelSnapshot& snap, const ParamList& params,
                     const std::vector<BatchNormLayer*>& norms) {
  if (snap.params.size() != params.size() || snap.norms.size() != norms.size()) {
    throw ContractError("snapshot does not match the model");
  }
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] = snap.params[i];
  for (std::size_t i = 0; i < norms.size(); ++i) norms[i]->stats = snap.norms[i];
}

void SaveCheckpoint(const std::string& path, ModelBundle& bundle,
                    double t_max) {
  ByteWriter w;
  w.PutBytes(kCheckpointMagic);
  w.PutU32(kCheckpointVersion);
  w.PutU32(static_cast<std::uint32_t>(bundle.config().intervals));
  w.PutF64(t_max);
  w.PutU32(static_cast<std::uint32_t>(bundle.modalities()));
  for (const ModalitySpec& m : bundle.config().modalities) {
    w.PutU32(static_cast<std::uint32_t>(m.name.size()));
    w.PutBytes(m.name);
  }
  const auto state = bundle.NamedState();
  w.PutU32(static_cast<std::uint32_t>(state.size()));
  for (const auto& [name, t] : state) {
    w.PutU32(static_cast<std::uint32_t>(name.size()));
    w.PutBytes(name);
    w.PutU32(static_cast<std::uint32_t>(t->ndim()));
    for (std::size_t d : t->shape()) w.PutU64(d);
    for (double v : t->data()) w.PutF64(v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.size()));
  if (!out) throw Error("failed writing checkpoint " + path);
}

CheckpointMeta LoadCheckpoint(const std::string& path, ModelBundle& bundle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  ByteReader r(bytes);
  if (r.Bytes(4) != kCheckpointMagic) throw DecodeError("bad checkpoint magic", 0);
  const std::size_t version_at = r.offset();
  if (r.U32() != kCheckpointVersion) {
    throw DecodeError("unsupported checkpoint version", version_at);
  }
  CheckpointMeta meta;
  meta.intervals = r.U32();
  meta.t_max = r.F64();
  const std::uint32_t m = r.U32();
  for (std::uint32_t k = 0; k < m; ++k) meta.modalities.push_back(r.Bytes(r.U32()));
  if (meta.intervals != bundle.config().intervals ||
      meta.modalities.size() != bundle.modalities()) {
    throw DataError("checkpoint does not match the model configuration");
  }
  for (std::size_t k = 0; k < bundle.modalities(); ++k) {
    if (meta.modalities[k] != bundle.config().modalities[k].name) {
      throw DataError("checkpoint modality mismatch: " + meta.modalities[k]);
    }
  }
  auto state = bundle.NamedState();
  const std::uint32_t count = r.U32();
  if (count != state.size()) throw DataError("checkpoint tensor count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const std::string name = r.Bytes(r.U32());
    if (name != state[i].first) throw DecodeError("unexpected tensor " + name, at);
    Shape shape(r.U32());
    for (std::size_t& d : shape) d = r.U64();
    if (shape != state[i].second->shape()) {
      throw DecodeError("shape mismatch for " + name, at);
    }
    for (double& v : state[i].second->mutable_data()) v = r.F64();
  }
  if (r.remaining() != 0) throw DecodeError("trailing checkpoint bytes", r.offset());
  return meta;
}

}  // namespace bvfl
