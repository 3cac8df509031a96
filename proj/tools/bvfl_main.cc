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

// Command-line entry point: gen-data, train, client, evaluate, attack,
// accountant, verify-bound.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "bvfl/attack/attack.h"
#include "bvfl/cli/run_config.h"
#include "bvfl/common/error.h"
#include "bvfl/federation/convergence.h"
#include "bvfl/federation/trainer.h"
#include "bvfl/federation/transport.h"
#include "bvfl/privacy/privacy.h"

namespace fs = std::filesystem;

namespace bvfl {
namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

const char* ReleaseName(Release r) {
  switch (r) {
    case Release::kRaw: return "raw";
    case Release::kClip: return "clip";
    case Release::kClipNoise: return "clip_noise";
    case Release::kNoise: return "noise";
  }
  return "raw";
}

Release ParseRelease(const std::string& s) {
  if (s == "raw") return Release::kRaw;
  if (s == "clip") return Release::kClip;
  if (s == "clip_noise") return Release::kClipNoise;
  if (s == "noise") return Release::kNoise;
  throw DataError("unknown release rule '" + s + "'");
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

// Flags that write straight into config keys.
class KeyFlags {
 public:
  void Add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    auto& slot = values_[key];
    bindings_.emplace_back(app->add_option(flag, slot, help + " [" + key + "]"), key);
  }
  bool Given(const std::string& key) const {
    for (const auto& [opt, k] : bindings_) {
      if (k == key && opt->count() > 0) return true;
    }
    return false;
  }
  void Apply(RunConfig& cfg) const {
    for (const auto& [opt, key] : bindings_) {
      if (opt->count() > 0) cfg.Set(key, values_.at(key));
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option*, std::string>> bindings_;
};

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  KeyFlags flags;
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "key = value configuration file");
  app->add_option("--set", c.sets, "override one key: --set privacy.epsilon=10");
}

void AddRunFlags(CLI::App* app, Common& c) {
  KeyFlags& f = c.flags;
  f.Add(app, "--mode", "run.mode", "centralized or vfl");
  f.Add(app, "--seed", "run.seed", "master seed");
  f.Add(app, "--out", "run.output", "output directory");
  f.Add(app, "--data", "data.path", "dataset directory (empty: generate)");
  f.Add(app, "--subjects", "data.subjects", "generated cohort size");
  f.Add(app, "--data-seed", "data.seed", "generator seed");
  f.Add(app, "--modalities", "data.modalities", "comma-separated modality names");
  f.Add(app, "--intervals", "model.intervals", "discrete-time intervals p");
  f.Add(app, "--embedding-width", "model.embedding_width", "client embedding width");
  f.Add(app, "--hidden-width", "model.hidden_width", "fixed hidden width (0: rule)");
  f.Add(app, "--weights", "model.weights", "sample or mean");
  f.Add(app, "--epochs", "train.epochs", "training epochs");
  f.Add(app, "--batch-size", "train.batch_size", "minibatch size");
  f.Add(app, "--lr", "train.learning_rate", "learning rate (0: mode default)");
  f.Add(app, "--patience", "train.patience", "early-stopping patience (0: off)");
  f.Add(app, "--dp", "privacy.enabled", "embedding perturbation on/off");
  f.Add(app, "--epsilon", "privacy.epsilon", "privacy budget (implies --dp on)");
  f.Add(app, "--delta", "privacy.delta", "target delta");
  f.Add(app, "--clip", "privacy.clip", "embedding clipping bound C");
  f.Add(app, "--c2", "privacy.c2", "noise calibration constant");
  f.Add(app, "--transport", "transport.kind", "inproc or tcp");
  f.Add(app, "--endpoints", "transport.endpoints", "host:port per client");
  f.Add(app, "--spawn", "transport.spawn", "spawn local client processes");
}

// defaults < file < BVFL_SEED < --set < flags.
RunConfig ResolveConfig(const Common& c) {
  RunConfig cfg;
  if (!c.config_file.empty()) cfg.LoadFile(c.config_file);
  if (const char* env = std::getenv("BVFL_SEED"); env != nullptr && *env != '\0') {
    cfg.Set("run.seed", env);
  }
  for (const std::string& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
    cfg.Set(s.substr(0, eq), s.substr(eq + 1));
  }
  c.flags.Apply(cfg);
  if (c.flags.Given("privacy.epsilon") && !c.flags.Given("privacy.enabled") &&
      !cfg.IsExplicit("privacy.enabled")) {
    cfg.Set("privacy.enabled", "true");
  }
  cfg.Validate();
  return cfg;
}

// Loads the configured dataset, generating it under <output>/data first when
// no path is given. Records the absolute path back into the config.
Dataset PrepareData(RunConfig& cfg) {
  fs::path dir = cfg.Get("data.path");
  if (dir.empty()) {
    dir = fs::path(cfg.Get("run.output")) / "data";
    fs::create_directories(dir);
    WriteDataset(GenerateCohort(cfg.Cohort()), dir.string());
  }
  dir = fs::absolute(dir);
  cfg.Set("data.path", dir.string());
  return LoadDataset(dir.string(), cfg.Loading());
}

std::string ModalityList(const ModelConfig& m) {
  std::string out;
  for (const ModalitySpec& s : m.modalities) {
    if (!out.empty()) out += ",";
    out += s.name + ":" + (s.kind == ModalityKind::kClinical ? "clinical" : "dense") + ":" +
           std::to_string(s.width);
  }
  return out;
}

// Config plus every resolved default that the keys leave implicit.
std::string Manifest(const RunConfig& cfg, const ModelConfig& model, const Dataset& data,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream os;
  os << "# bvfl run manifest\n"
     << "manifest.digest = " << HexDigest(cfg.Digest()) << "\n"
     << cfg.ToText()
     << "manifest.modalities = " << ModalityList(model) << "\n"
     << "manifest.subjects = " << data.ids.size() << "\n"
     << "manifest.n_train = " << data.Indices(Split::kTrain).size() << "\n"
     << "manifest.t_max = " << Num(GridHorizon(data)) << "\n"
     << "manifest.t_max_source = training split\n"
     << "manifest.learning_rate = " << Num(cfg.ResolvedLearningRate()) << "\n"
     << "manifest.optimizer = adamw(beta1=0.9,beta2=0.999,eps=1e-8)\n"
     << "manifest.prior = " << PriorToString(model.prior) << "\n"
     << "manifest.activation = relu\n"
     << "manifest.attention_kl = included\n"
     << "manifest.kl_weight = 1/n_train\n"
     << "manifest.spike_slab_kl_samples = 1\n"
     << "manifest.batch_sampling = uniform with replacement\n"
     << "manifest.metrics_grid = model intervals on [0, t_max]\n"
     << "manifest.ipcw = kaplan-meier of censoring on the evaluated split\n";
  for (const auto& [k, v] : extra) os << "manifest." << k << " = " << v << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> EvalLines(const EvalOptions& e) {
  return {{"eval_release", ReleaseName(e.release)},
          {"eval_sigma", Num(e.sigma)},
          {"eval_clip", Num(e.clip)}};
}

std::vector<std::pair<std::string, std::string>> AccountantLines(
    const std::optional<AccountantReport>& r) {
  if (!r) return {};
  return {{"privacy_sigma", Num(r->sigma)},
          {"privacy_tau", std::to_string(r->tau)},
          {"privacy_p_sample", Num(r->p_sample)},
          {"privacy_delta_achieved", Num(r->delta_achieved)},
          {"privacy_lambda_star", Num(r->lambda_star)}};
}

void PrintEpoch(const EpochRecord& r) {
  std::cout << "epoch " << r.epoch << " train_loss=" << r.train_loss
            << " val_loss=" << r.val_loss << " val_cindex=" << r.val_cindex << std::endl;
}

class ChildProcesses {
 public:
  ~ChildProcesses() {
    for (pid_t p : pids_) {
      ::kill(p, SIGTERM);
      ::waitpid(p, nullptr, 0);
    }
  }
  void Spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
      ::execv("/proc/self/exe", argv.data());
      std::_Exit(127);
    }
    pids_.push_back(pid);
  }
  // Waits for every child; throws if any exited unsuccessfully.
  void Join() {
    std::vector<pid_t> pids;
    pids.swap(pids_);
    bool ok = true;
    for (pid_t p : pids) {
      int status = 0;
      if (::waitpid(p, &status, 0) < 0 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        ok = false;
      }
    }
    if (!ok) throw TransportError("a client process failed");
  }

 private:
  std::vector<pid_t> pids_;
};

TrainResult TrainOverTcp(const RunConfig& cfg, const Dataset& data,
                         const ModelConfig& model, const TrainOptions& options,
                         const fs::path& out) {
  const std::size_t m = model.modalities.size();
  const bool spawn = cfg.Bool("transport.spawn");
  std::vector<Endpoint> endpoints = cfg.Endpoints();
  if (!endpoints.empty() && endpoints.size() != m) {
    throw ConfigError("transport.endpoints", "expected " + std::to_string(m) + " endpoints");
  }
  std::vector<std::unique_ptr<TcpListener>> listeners;
  for (std::size_t k = 0; k < m; ++k) {
    if (endpoints.empty()) {
      listeners.push_back(std::make_unique<TcpListener>(0));
    } else {
      listeners.push_back(std::make_unique<TcpListener>(endpoints[k].port, endpoints[k].host));
    }
  }
  ChildProcesses children;
  if (spawn) {
    for (std::size_t k = 0; k < m; ++k) {
      const std::string host = endpoints.empty() ? "127.0.0.1" : endpoints[k].host;
      children.Spawn({"bvfl", "client", "--config", (out / "config.txt").string(), "--index",
                      std::to_string(k), "--connect",
                      host + ":" + std::to_string(listeners[k]->port()), "--out",
                      out.string()});
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      std::cout << "waiting for client " << k << " on port " << listeners[k]->port()
                << std::endl;
    }
  }
  // Client k is whoever connects to listener k.
  std::vector<std::unique_ptr<TcpChannel>> owned;
  std::vector<Channel*> channels;
  for (auto& l : listeners) {
    owned.push_back(l->Accept());
    channels.push_back(owned.back().get());
  }
  TrainResult r = RunVflServer(data, model, options, channels);
  owned.clear();
  if (spawn) children.Join();
  return r;
}

int CmdGenData(const Common& c) {
  RunConfig cfg = ResolveConfig(c);
  const fs::path out = cfg.Get("run.output");
  fs::create_directories(out);
  const Dataset data = GenerateCohort(cfg.Cohort());
  WriteDataset(data, out.string());
  std::cout << "wrote " << data.ids.size() << " subjects, " << data.modalities.size()
            << " modalities to " << out.string() << "\n";
  return 0;
}

int CmdTrain(const Common& c) {
  RunConfig cfg = ResolveConfig(c);
  const fs::path out = fs::absolute(cfg.Get("run.output"));
  fs::create_directories(out);
  cfg.Set("run.output", out.string());
  const Dataset data = PrepareData(cfg);
  const ModelConfig model = ConfigForDataset(data, cfg.Model());
  TrainOptions options = cfg.Training();
  options.on_epoch = PrintEpoch;
  WriteFile(out / "config.txt", cfg.ToText());

  TrainResult r;
  if (!cfg.vfl()) {
    r = RunCentralizedTraining(data, model, options);
  } else if (cfg.Get("transport.kind") == "tcp") {
    r = TrainOverTcp(cfg, data, model, options, out);
  } else {
    r = RunVflTraining(data, model, options);
  }

  WriteHistory((out / "history.tsv").string(), r.history);
  SaveCheckpoint((out / "model.ckpt").string(), *r.bundle, r.t_max);
  auto extra = EvalLines(r.eval);
  extra.emplace_back("best_epoch", std::to_string(r.best_epoch));
  extra.emplace_back("epochs_run", std::to_string(r.history.size()));
  for (auto& line : AccountantLines(r.accountant)) extra.push_back(std::move(line));
  WriteFile(out / "manifest.txt", Manifest(cfg, model, data, extra));
  if (r.accountant) std::cout << r.accountant->ToText();
  std::cout << "best_epoch=" << r.best_epoch << "\n"
            << "digest=" << HexDigest(cfg.Digest()) << "\n"
            << "output=" << out.string() << "\n";
  return 0;
}

int CmdClient(const Common& c, std::size_t index, const std::string& connect,
              const std::string& out_dir) {
  RunConfig cfg = ResolveConfig(c);
  if (cfg.Get("data.path").empty()) {
    throw ConfigError("data.path", "a client needs the dataset directory");
  }
  const Dataset data = LoadDataset(cfg.Get("data.path"), cfg.Loading());
  const ModelConfig model = ConfigForDataset(data, cfg.Model());
  if (index >= model.modalities.size()) throw ConfigError("index", "client index out of range");
  const auto colon = connect.rfind(':');
  if (colon == std::string::npos) throw ConfigError("connect", "expected host:port");
  int port = 0;
  try {
    port = std::stoi(connect.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("connect", "bad port in '" + connect + "'");
  }
  if (port <= 0 || port > 65535) throw ConfigError("connect", "port out of range");

  ClientRuntime rt = MakeClient(data, model, cfg.Training(), index);
  auto channel = TcpChannel::Connect(connect.substr(0, colon), static_cast<std::uint16_t>(port));
  ServeChannel(*channel, *rt.session);
  const fs::path out = out_dir.empty() ? fs::path(cfg.Get("run.output")) : fs::path(out_dir);
  fs::create_directories(out);
  SaveCheckpoint((out / ("client_" + std::to_string(index) + ".ckpt")).string(), *rt.bundle,
                 GridHorizon(data));
  return 0;
}

// Server checkpoint plus, for TCP runs, each client's trained extractor.
std::unique_ptr<ModelBundle> LoadRun(const RunConfig& cfg, const ModelConfig& model,
                                     const fs::path& dir, double& t_max) {
  auto bundle = std::make_unique<ModelBundle>(model, cfg.seed());
  t_max = LoadCheckpoint((dir / "model.ckpt").string(), *bundle).t_max;
  if (cfg.Get("transport.kind") != "tcp") return bundle;
  for (std::size_t k = 0; k < bundle->modalities(); ++k) {
    const fs::path path = dir / ("client_" + std::to_string(k) + ".ckpt");
    if (!fs::exists(path)) throw DataError("missing client checkpoint " + path.string());
    ModelBundle client(model, cfg.seed());
    LoadCheckpoint(path.string(), client);
    const ParamList src = client.client_parameters(k);
    const ParamList dst = bundle->client_parameters(k);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
    const auto sn = client.extractor(k).batch_norms();
    const auto dn = bundle->extractor(k).batch_norms();
    for (std::size_t i = 0; i < sn.size(); ++i) dn[i]->stats = sn[i]->stats;
  }
  return bundle;
}

int CmdEvaluate(const std::string& run_dir, const std::string& split_name) {
  const fs::path dir = run_dir;
  RunConfig cfg;
  cfg.LoadFile((dir / "config.txt").string());
  cfg.Validate();
  const Split split = ParseSplit(split_name.empty() ? cfg.Get("eval.split") : split_name);
  std::map<std::string, std::string> manifest;
  for (auto& [k, v] : ParseKeyValues(ReadTextFile((dir / "manifest.txt").string()),
                                     (dir / "manifest.txt").string())) {
    manifest[k] = v;
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = manifest.find(key);
    if (it == manifest.end()) throw DataError("manifest lacks " + key);
    return it->second;
  };
  if (need("manifest.digest") != HexDigest(cfg.Digest())) {
    throw DataError("config.txt does not match the manifest digest");
  }
  const Dataset data = LoadDataset(cfg.Get("data.path"), cfg.Loading());
  const ModelConfig model = ConfigForDataset(data, cfg.Model());
  double t_max = 0.0;
  auto bundle = LoadRun(cfg, model, dir, t_max);
  EvalOptions eval;
  eval.release = ParseRelease(need("manifest.eval_release"));
  eval.sigma = std::stod(need("manifest.eval_sigma"));
  eval.clip = std::stod(need("manifest.eval_clip"));
  eval.seed = cfg.seed();
  const MetricsReport report = EvaluateSplit(*bundle, data, split, t_max, eval);
  const std::string text = std::string("split=") + SplitName(split) + "\n" + report.ToText();
  WriteFile(dir / (std::string("metrics_") + SplitName(split) + ".txt"), text);
  std::cout << text;
  return 0;
}

int CmdAttack(const Common& c) {
  RunConfig cfg = ResolveConfig(c);
  if (!cfg.vfl()) throw ConfigError("run.mode", "the attack targets a vfl run");
  const fs::path out = fs::absolute(cfg.Get("run.output"));
  fs::create_directories(out);
  cfg.Set("run.output", out.string());
  const Dataset data = PrepareData(cfg);
  const ModelConfig model = ConfigForDataset(data, cfg.Model());
  const AttackConfig attack = cfg.Attack();
  if (attack.target >= model.modalities.size()) {
    throw ConfigError("attack.target", "no such client");
  }
  WriteFile(out / "config.txt", cfg.ToText());
  const AttackOutcome o = RunAttack(data, model, cfg.Training(), attack);
  WriteProjection((out / "projection.tsv").string(), o.projection);
  std::ostringstream os;
  os << "target=" << model.modalities[attack.target].name << "\n"
     << o.report.ToText() << "silhouette=" << Num(o.silhouette) << "\n"
     << "test_cindex=" << Num(o.test_cindex) << "\n";
  WriteFile(out / "attack.txt", os.str());
  WriteFile(out / "manifest.txt", Manifest(cfg, model, data, {}));
  std::cout << os.str();
  return 0;
}

int CmdVerifyBound(const Common& c) {
  RunConfig cfg = ResolveConfig(c);
  const ConvergenceReport r =
      VerifyConvergenceBound(cfg.Toy(), cfg.Unsigned("bound.seeds"), cfg.seed());
  std::cout << r.ToText();
  const bool ok = r.Holds(1.05);
  std::cout << "holds=" << (ok ? "true" : "false") << "\n";
  return ok ? 0 : kExitRuntime;
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"Bayesian vertical federated survival analysis"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand every subcommand");

  Common gen, train, client, attack, bound;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "write a synthetic cohort");
  AddCommon(gen_cmd, gen);
  gen.flags.Add(gen_cmd, "--out", "run.output", "dataset directory");
  gen.flags.Add(gen_cmd, "--subjects", "data.subjects", "cohort size");
  gen.flags.Add(gen_cmd, "--seed", "data.seed", "generator seed");
  gen.flags.Add(gen_cmd, "--censoring", "data.censoring", "target censoring fraction");
  gen.flags.Add(gen_cmd, "--full-width", "data.full_width", "full feature widths");

  CLI::App* train_cmd = app.add_subcommand("train", "train a centralized or vfl model");
  AddCommon(train_cmd, train);
  AddRunFlags(train_cmd, train);

  std::size_t client_index = 0;
  std::string client_connect, client_out;
  CLI::App* client_cmd = app.add_subcommand("client", "run one vfl client over tcp");
  AddCommon(client_cmd, client);
  client_cmd->add_option("--index", client_index, "client (modality) index")->required();
  client_cmd->add_option("--connect", client_connect, "server host:port")->required();
  client_cmd->add_option("--out", client_out, "directory for the client checkpoint");

  std::string eval_run, eval_split;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "metrics of a trained run on a split");
  eval_cmd->add_option("--run", eval_run, "run directory written by train")->required();
  eval_cmd->add_option("--split", eval_split, "train, val or test");

  CLI::App* attack_cmd = app.add_subcommand("attack", "feature reconstruction attack");
  AddCommon(attack_cmd, attack);
  AddRunFlags(attack_cmd, attack);
  attack.flags.Add(attack_cmd, "--target", "attack.target", "attacked client index");
  attack.flags.Add(attack_cmd, "--public-fraction", "attack.public_fraction",
                   "share of subjects known to the server");
  attack.flags.Add(attack_cmd, "--decoder-epochs", "attack.decoder_epochs", "decoder epochs");

  PrivacyParams acct;
  acct.sigma = 0.0;
  CLI::App* acct_cmd = app.add_subcommand("accountant", "privacy accountant report");
  acct_cmd->add_option("--epsilon", acct.epsilon, "target epsilon");
  acct_cmd->add_option("--delta", acct.delta, "target delta");
  acct_cmd->add_option("--p", acct.p_sample, "sampling probability");
  acct_cmd->add_option("--tau", acct.tau, "number of steps");
  acct_cmd->add_option("--c2", acct.c2, "noise calibration constant");
  acct_cmd->add_option("--clip", acct.clip, "clipping bound");
  acct_cmd->add_option("--sigma", acct.sigma, "fixed noise multiplier (default: calibrate)");

  CLI::App* bound_cmd = app.add_subcommand("verify-bound", "convergence bound on the quadratic toy");
  AddCommon(bound_cmd, bound);
  bound.flags.Add(bound_cmd, "--seed", "run.seed", "master seed");
  bound.flags.Add(bound_cmd, "--sigma", "bound.sigma", "noise multiplier");
  bound.flags.Add(bound_cmd, "--seeds", "bound.seeds", "independent runs");
  bound.flags.Add(bound_cmd, "--epochs", "bound.epochs", "gradient steps");
  bound.flags.Add(bound_cmd, "--clients", "bound.clients", "client blocks M");
  bound.flags.Add(bound_cmd, "--dim", "bound.embedding_dim", "block width d");
  bound.flags.Add(bound_cmd, "--samples", "bound.samples", "samples N");
  bound.flags.Add(bound_cmd, "--alpha", "bound.alpha", "smallest eigenvalue");
  bound.flags.Add(bound_cmd, "--beta", "bound.beta", "largest eigenvalue");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  if (*gen_cmd) return CmdGenData(gen);
  if (*train_cmd) return CmdTrain(train);
  if (*client_cmd) return CmdClient(client, client_index, client_connect, client_out);
  if (*eval_cmd) return CmdEvaluate(eval_run, eval_split);
  if (*attack_cmd) return CmdAttack(attack);
  if (*acct_cmd) {
    std::cout << MakeAccountantReport(acct).ToText();
    return 0;
  }
  return CmdVerifyBound(bound);
}

}  // namespace
}  // namespace bvfl

int main(int argc, char** argv) {
  try {
    return bvfl::Dispatch(argc, argv);
  } catch (const bvfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bvfl::kExitValidation;
  } catch (const bvfl::PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return bvfl::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bvfl::kExitRuntime;
  }
}
