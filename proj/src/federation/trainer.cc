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

#include "bvfl/federation/trainer.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bvfl/autodiff/adamw.h"
#include "bvfl/common/error.h"
#include "bvfl/survival/survival.h"

namespace bvfl {
namespace {

std::string Num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double ValCindex(const Tensor& hazards, std::span<const double> times,
                 std::span<const int> events) {
  try {
    return Concordance(RiskScores(HazardsToSurvival(hazards)), times, events);
  } catch (const UndefinedMetricError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<BatchNormLayer*> AllNorms(ModelBundle& b) {
  std::vector<BatchNormLayer*> out;
  for (std::size_t k = 0; k < b.modalities(); ++k) {
    for (BatchNormLayer* n : b.extractor(k).batch_norms()) out.push_back(n);
  }
  for (BatchNormLayer* n : b.head().batch_norms()) out.push_back(n);
  return out;
}

// Epoch loop shared by both trainers.
struct LoopHooks {
  std::function<double(const RoundPlan&)> step;
  std::function<Tensor(std::uint32_t epoch)> validate;
  std::function<void()> snapshot;
  std::function<void()> restore;
};

void RunEpochs(const Dataset& data, const TrainOptions& options,
               const TimeGrid& grid, const LoopHooks& hooks, TrainResult& result) {
  const std::vector<std::size_t> train = data.Indices(Split::kTrain);
  const std::vector<std::size_t> val = data.Indices(Split::kVal);
  if (val.empty()) throw DataError("validation split is empty");
  const std::size_t batches = BatchesPerEpoch(train.size(), options.batch_size);
  const std::vector<double> val_times = data.Times(val);
  const std::vector<int> val_events = data.Events(val);
  const TargetMask val_targets = BuildTargets(val_times, val_events, grid);
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t e = 0; e < options.epochs; ++e) {
    double sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const RoundPlan plan =
          MakeRoundPlan(options.seed, static_cast<std::uint32_t>(e),
                        static_cast<std::uint32_t>(b), batches, train,
                        options.batch_size);
      sum += hooks.step(plan);
    }
    const Tensor hazards = hooks.validate(static_cast<std::uint32_t>(e));
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.train_loss = sum / static_cast<double>(batches);
    rec.val_loss = Nll(hazards, val_targets);
    rec.val_cindex = ValCindex(hazards, val_times, val_events);
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
    if (rec.val_loss < best) {
      best = rec.val_loss;
      result.best_epoch = rec.epoch;
      since_best = 0;
      hooks.snapshot();
    } else if (options.patience > 0 && ++since_best >= options.patience) {
      break;
    }
  }
  hooks.restore();
}

EvalOptions TestEval(const TrainOptions& options, bool vfl, double sigma) {
  EvalOptions eval;
  eval.seed = options.seed;
  eval.clip = options.clip;
  eval.sigma = sigma;
  if (options.dp && vfl) eval.release = Release::kClipNoise;
  if (options.dp && !vfl && options.central_clip) eval.release = Release::kClip;
  return eval;
}

void FillPrivacy(const TrainOptions& options, std::size_t n_train,
                 TrainResult& result) {
  if (options.dp) result.accountant = MakeAccountantReport(PrivacyFor(options, n_train));
}

TrainResult ServeVfl(std::unique_ptr<ModelBundle> bundle, const Dataset& labels,
                     const TrainOptions& options,
                     std::span<Channel* const> channels) {
  const ModelConfig& cfg = bundle->config();
  const std::size_t m = cfg.modalities.size();
  if (channels.size() != m) {
    throw PreconditionError("one channel per modality client required");
  }
  const std::size_t n_train = labels.Indices(Split::kTrain).size();
  const SessionConfig session = MakeSessionConfig(options, cfg, n_train, kVflLearningRate);
  TrainResult result;
  result.t_max = GridHorizon(labels);
  const TimeGrid grid(cfg.intervals, result.t_max);
  ServerSession server(bundle->head(), m, labels.ids,
                       BuildTargets(labels.times, labels.events, grid), session);

  auto send_all = [&](ControlMessage c) {
    for (std::size_t k = 0; k < m; ++k) {
      c.client = static_cast<std::uint16_t>(k);
      channels[k]->Send(ToFrame(c));
    }
  };
  auto collect = [&]() {
    std::vector<EmbeddingMessage> msgs;
    for (std::size_t k = 0; k < m; ++k) {
      const Frame e = channels[k]->Receive();
      const Frame kl = channels[k]->Receive();
      msgs.push_back(EmbeddingFromFrames(e, kl));
    }
    return msgs;
  };
  auto expect_ack = [&]() {
    for (std::size_t k = 0; k < m; ++k) {
      const ControlMessage a = ControlFromFrame(channels[k]->Receive());
      if (a.command != Command::kAck || a.client != k) {
        throw ProtocolError("client " + std::to_string(k) + " did not acknowledge");
      }
    }
  };

  ControlMessage start;
  start.command = Command::kStart;
  start.digest = options.digest;
  send_all(start);
  expect_ack();

  const std::vector<std::size_t> val = labels.Indices(Split::kVal);
  const std::vector<std::uint64_t> val_keys = server.subjects().Keys(val);
  ModelSnapshot best;
  LoopHooks hooks;
  hooks.step = [&](const RoundPlan& plan) {
    ControlMessage c;
    c.command = Command::kTrainRound;
    c.round = plan.round;
    c.epoch = plan.epoch;
    c.batch = plan.batch;
    c.subjects = server.subjects().Keys(plan.rows);
    send_all(c);
    const std::vector<EmbeddingMessage> msgs = collect();
    ServerSession::StepResult r = server.Step(msgs);
    for (std::size_t k = 0; k < m; ++k) channels[k]->Send(ToFrame(r.gradients[k]));
    return r.loss;
  };
  hooks.validate = [&](std::uint32_t epoch) {
    ControlMessage c;
    c.command = Command::kEvaluate;
    c.round = epoch;
    c.epoch = epoch;
    c.subjects = val_keys;
    send_all(c);
    return server.Hazards(collect());
  };
  hooks.snapshot = [&]() {
    best = TakeSnapshot(bundle->server_parameters(), bundle->head().batch_norms());
    ControlMessage c;
    c.command = Command::kSnapshot;
    send_all(c);
  };
  hooks.restore = [&]() {
    if (!best.params.empty()) {
      RestoreSnapshot(best, bundle->server_parameters(), bundle->head().batch_norms());
    }
    ControlMessage c;
    c.command = Command::kRestore;
    send_all(c);
  };
  RunEpochs(labels, options, grid, hooks, result);
  ControlMessage stop;
  stop.command = Command::kStop;
  send_all(stop);
  expect_ack();

  result.bundle = std::move(bundle);
  FillPrivacy(options, n_train, result);
  result.eval = TestEval(options, true, session.sigma);
  return result;
}

}  // namespace

ModelConfig ConfigForDataset(const Dataset& data, const ModelConfig& base) {
  ModelConfig out = base;
  out.modalities.clear();
  for (const ModalityData& md : data.modalities) {
    ModalitySpec spec = md.spec;
    for (const ModalitySpec& b : base.modalities) {
      if (b.name == spec.name) {
        spec.hidden_layers = b.hidden_layers;
        spec.scale = b.scale;
      }
    }
    out.modalities.push_back(spec);
  }
  return out;
}

double GridHorizon(const Dataset& data) {
  double t = 0.0;
  for (std::size_t i : data.Indices(Split::kTrain)) t = std::max(t, data.times[i]);
  if (!(t > 0)) throw DataError("training split is empty");
  return t;
}

PrivacyParams PrivacyFor(const TrainOptions& options, std::size_t n_train) {
  PrivacyParams p;
  p.epsilon = options.epsilon;
  p.delta = options.delta;
  p.p_sample = std::min(1.0, static_cast<double>(options.batch_size) /
                                 static_cast<double>(n_train));
  p.tau = static_cast<std::int64_t>(options.epochs *
                                    BatchesPerEpoch(n_train, options.batch_size));
  p.clip = options.clip;
  p.c2 = options.c2;
  p.Validate();
  return p;
}

SessionConfig MakeSessionConfig(const TrainOptions& options,
                                const ModelConfig& config, std::size_t n_train,
                                double default_lr) {
  if (options.epochs == 0) throw PreconditionError("epochs must be positive");
  SessionConfig s;
  s.seed = options.seed;
  s.mode = options.mode;
  s.dp = options.dp;
  s.clip = options.clip;
  if (options.dp) s.sigma = PrivacyFor(options, n_train).ResolvedSigma();
  s.n_train = static_cast<double>(n_train);
  s.aux_weight = config.aux_weight;
  s.adam.learning_rate = options.learning_rate > 0 ? options.learning_rate : default_lr;
  s.adam.weight_decay = options.weight_decay;
  s.digest = options.digest;
  return s;
}

TrainResult RunCentralizedTraining(const Dataset& data, const ModelConfig& config,
                                   const TrainOptions& options) {
  const ModelConfig cfg = ConfigForDataset(data, config);
  auto bundle = std::make_unique<ModelBundle>(cfg, options.seed);
  const std::size_t n_train = data.Indices(Split::kTrain).size();
  SessionConfig session =
      MakeSessionConfig(options, cfg, n_train, kCentralizedLearningRate);
  if (!options.central_clip) session.dp_release = Release::kNoise;
  const std::size_t m = cfg.modalities.size();
  TrainResult result;
  result.t_max = GridHorizon(data);
  const TimeGrid grid(cfg.intervals, result.t_max);
  const TargetMask targets = BuildTargets(data.times, data.events, grid);
  const std::vector<std::size_t> val = data.Indices(Split::kVal);
  EvalOptions val_eval = TestEval(options, false, session.sigma);

  ModelSnapshot best;
  LoopHooks hooks;
  hooks.step = [&](const RoundPlan& plan) {
    Tape tape;
    std::vector<Var> emb, kls;
    for (std::size_t k = 0; k < m; ++k) {
      const ClientPass pass = ClientForward(bundle->extractor(k), tape,
                                            data.Rows(k, plan.rows), session, k,
                                            plan.round);
      emb.push_back(pass.released);
      kls.push_back(pass.kl);
    }
    const ServerPass pass =
        ServerForward(bundle->head(), tape, emb, kls,
                      SelectTargets(targets, plan.rows), session, m, plan.round);
    const Gradients grads = tape.Backward(pass.loss);
    ApplyAdamW(bundle->parameters(), tape, grads, session.adam);
    return pass.loss.value().item();
  };
  hooks.validate = [&](std::uint32_t epoch) {
    val_eval.round = epoch;
    return PredictHazards(*bundle, data, val, val_eval);
  };
  hooks.snapshot = [&]() { best = TakeSnapshot(bundle->parameters(), AllNorms(*bundle)); };
  hooks.restore = [&]() {
    if (!best.params.empty()) RestoreSnapshot(best, bundle->parameters(), AllNorms(*bundle));
  };
  RunEpochs(data, options, grid, hooks, result);
  result.bundle = std::move(bundle);
  FillPrivacy(options, n_train, result);
  result.eval = TestEval(options, false, session.sigma);
  return result;
}

ClientRuntime MakeClient(const Dataset& data, const ModelConfig& config,
                         const TrainOptions& options, std::size_t k) {
  const ModelConfig cfg = ConfigForDataset(data, config);
  if (k >= cfg.modalities.size()) throw PreconditionError("client index out of range");
  const std::size_t n_train = data.Indices(Split::kTrain).size();
  ClientRuntime rt;
  rt.bundle = std::make_unique<ModelBundle>(cfg, options.seed);
  rt.session = std::make_unique<ClientSession>(
      k, rt.bundle->extractor(k), data.modalities[k].features, data.ids,
      MakeSessionConfig(options, cfg, n_train, kVflLearningRate));
  return rt;
}

TrainResult RunVflTraining(const Dataset& data, const ModelConfig& config,
                           const TrainOptions& options) {
  const ModelConfig cfg = ConfigForDataset(data, config);
  auto bundle = std::make_unique<ModelBundle>(cfg, options.seed);
  const std::size_t n_train = data.Indices(Split::kTrain).size();
  const SessionConfig session = MakeSessionConfig(options, cfg, n_train, kVflLearningRate);
  std::vector<std::unique_ptr<ClientSession>> clients;
  std::vector<std::unique_ptr<InProcessChannel>> owned;
  std::vector<Channel*> channels;
  for (std::size_t k = 0; k < cfg.modalities.size(); ++k) {
    clients.push_back(std::make_unique<ClientSession>(
        k, bundle->extractor(k), data.modalities[k].features, data.ids, session));
    owned.push_back(std::make_unique<InProcessChannel>(*clients.back()));
    channels.push_back(owned.back().get());
  }
  Dataset labels = data;
  labels.modalities.clear();
  return ServeVfl(std::move(bundle), labels, options, channels);
}

TrainResult RunVflServer(const Dataset& labels, const ModelConfig& config,
                         const TrainOptions& options,
                         std::span<Channel* const> channels) {
  const ModelConfig cfg = ConfigForDataset(labels, config);
  Dataset label_view = labels;
  label_view.modalities.clear();
  return ServeVfl(std::make_unique<ModelBundle>(cfg, options.seed), label_view,
                  options, channels);
}

Tensor PredictHazards(ModelBundle& bundle, const Dataset& data,
                      std::span<const std::size_t> rows, const EvalOptions& eval) {
  if (rows.empty()) throw PreconditionError("no subjects to predict");
  std::vector<Tensor> emb;
  for (std::size_t k = 0; k < bundle.modalities(); ++k) {
    CounterRng noise(DeriveKey(eval.seed, kStreamDpEval, k, eval.round));
    emb.push_back(ClientEvaluate(bundle.extractor(k), data.Rows(k, rows),
                                 eval.release, eval.sigma, eval.clip, &noise));
  }
  return ServerEvaluate(bundle.head(), emb);
}

MetricsReport EvaluateSplit(ModelBundle& bundle, const Dataset& data, Split split,
                            double t_max, const EvalOptions& eval) {
  const std::vector<std::size_t> rows = data.Indices(split);
  const Tensor hazards = PredictHazards(bundle, data, rows, eval);
  const TimeGrid grid(bundle.config().intervals, t_max);
  return EvaluateSurvival(HazardsToSurvival(hazards), data.Times(rows),
                          data.Events(rows), grid);
}

void WriteHistory(const std::string& path, std::span<const EpochRecord> history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch\ttrain_loss\tval_loss\tval_cindex\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << '\t' << Num(r.train_loss) << '\t' << Num(r.val_loss) << '\t'
        << Num(r.val_cindex) << '\n';
  }
}

std::vector<EpochRecord> ReadHistory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "epoch\ttrain_loss\tval_loss\tval_cindex") {
    throw DataError(path + ": bad history header");
  }
  std::vector<EpochRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream ls(line);
    std::string cells[4];
    for (auto& c : cells) {
      if (!std::getline(ls, c, '\t')) {
        throw DataError(path + ": row " + std::to_string(row) + " has too few columns");
      }
    }
    std::string extra;
    if (std::getline(ls, extra, '\t')) {
      throw DataError(path + ": row " + std::to_string(row) + " has too many columns");
    }
    EpochRecord r;
    try {
      r.epoch = std::stoul(cells[0]);
      r.train_loss = std::stod(cells[1]);
      r.val_loss = std::stod(cells[2]);
      r.val_cindex = std::stod(cells[3]);
    } catch (const std::exception&) {
      throw DataError(path + ": unparseable value at row " + std::to_string(row));
    }
    if (r.epoch != out.size() + 1) {
      throw DataError(path + ": epochs must count up from 1");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace bvfl
