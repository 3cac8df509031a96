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

#include "bvfl/cli/run_config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr KeySpec kKeys[] = {
    {"run.mode", "centralized", KeyKind::kChoice, "centralized|vfl", true},
    {"run.seed", "1", KeyKind::kUnsigned, "", true},
    {"run.output", "run", KeyKind::kPath, "", false},
    {"data.path", "", KeyKind::kPath, "", false},
    {"data.subjects", "2000", KeyKind::kUnsigned, "", true},
    {"data.full_width", "false", KeyKind::kBool, "", true},
    {"data.seed", "1", KeyKind::kUnsigned, "", true},
    {"data.censoring", "0.3", KeyKind::kDouble, "", true},
    {"data.modalities", "", KeyKind::kString, "", true},
    {"data.top_variance", "0", KeyKind::kUnsigned, "", true},
    {"model.intervals", "30", KeyKind::kUnsigned, "", true},
    {"model.embedding_width", "512", KeyKind::kUnsigned, "", true},
    {"model.head_hidden_layers", "4", KeyKind::kUnsigned, "", true},
    {"model.clinical_embedding_width", "32", KeyKind::kUnsigned, "", true},
    {"model.clinical_hidden_width", "256", KeyKind::kUnsigned, "", true},
    {"model.hidden_width", "0", KeyKind::kUnsigned, "", true},
    {"model.dropout", "0.5", KeyKind::kDouble, "", true},
    {"model.aux_weight", "0.05", KeyKind::kDouble, "", true},
    {"model.weights", "sample", KeyKind::kChoice, "sample|mean", true},
    {"train.epochs", "100", KeyKind::kUnsigned, "", true},
    {"train.batch_size", "64", KeyKind::kUnsigned, "", true},
    {"train.learning_rate", "0", KeyKind::kDouble, "", true},
    {"train.weight_decay", "0.01", KeyKind::kDouble, "", true},
    {"train.patience", "10", KeyKind::kUnsigned, "", true},
    {"privacy.enabled", "false", KeyKind::kBool, "", true},
    {"privacy.epsilon", "1", KeyKind::kDouble, "", true},
    {"privacy.delta", "1e-05", KeyKind::kDouble, "", true},
    {"privacy.clip", "1", KeyKind::kDouble, "", true},
    {"privacy.c2", "1", KeyKind::kDouble, "", true},
    {"transport.kind", "inproc", KeyKind::kChoice, "inproc|tcp", true},
    {"transport.endpoints", "", KeyKind::kString, "", false},
    {"transport.spawn", "true", KeyKind::kBool, "", false},
    {"eval.split", "test", KeyKind::kChoice, "train|val|test", true},
    {"attack.target", "1", KeyKind::kUnsigned, "", true},
    {"attack.public_fraction", "0.3", KeyKind::kDouble, "", true},
    {"attack.decoder_epochs", "100", KeyKind::kUnsigned, "", true},
    {"attack.decoder_learning_rate", "0.001", KeyKind::kDouble, "", true},
    {"bound.sigma", "0.1", KeyKind::kDouble, "", true},
    {"bound.seeds", "200", KeyKind::kUnsigned, "", true},
    {"bound.epochs", "50", KeyKind::kUnsigned, "", true},
    {"bound.clients", "2", KeyKind::kUnsigned, "", true},
    {"bound.embedding_dim", "512", KeyKind::kUnsigned, "", true},
    {"bound.samples", "100", KeyKind::kUnsigned, "", true},
    {"bound.alpha", "0.1", KeyKind::kDouble, "", true},
    {"bound.beta", "1", KeyKind::kDouble, "", true},
    {"bound.clip", "1", KeyKind::kDouble, "", true},
};

const KeySpec* FindKey(std::string_view key) {
  for (const KeySpec& k : kKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

bool ParseUnsigned(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(Trim(s.substr(start, at - start)));
    if (at == std::string::npos) break;
    start = at + 1;
  }
  return out;
}

std::string Canonical(const KeySpec& spec, const std::string& raw) {
  const std::string v = Trim(raw);
  const std::string key(spec.key);
  switch (spec.kind) {
    case KeyKind::kString:
    case KeyKind::kPath:
      return v;
    case KeyKind::kBool:
      if (v == "true" || v == "on" || v == "1" || v == "yes") return "true";
      if (v == "false" || v == "off" || v == "0" || v == "no") return "false";
      throw ConfigError(key, "expected a boolean, got '" + v + "'");
    case KeyKind::kUnsigned: {
      std::uint64_t u = 0;
      if (!ParseUnsigned(v, u)) {
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
      }
      return std::to_string(u);
    }
    case KeyKind::kDouble: {
      double d = 0.0;
      if (!ParseDouble(v, d)) throw ConfigError(key, "expected a number, got '" + v + "'");
      return FormatDouble(d);
    }
    case KeyKind::kChoice:
      for (const std::string& c : SplitOn(std::string(spec.choices), '|')) {
        if (c == v) return v;
      }
      throw ConfigError(key, "expected one of " + std::string(spec.choices) +
                                 ", got '" + v + "'");
  }
  return v;
}

void Require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

std::span<const KeySpec> ConfigKeys() { return kKeys; }

std::vector<std::pair<std::string, std::string>> ParseKeyValues(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DataError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    out.emplace_back(Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
  }
  return out;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string HexDigest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

RunConfig::RunConfig() {
  for (const KeySpec& k : kKeys) values_[std::string(k.key)] = std::string(k.fallback);
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  const KeySpec* spec = FindKey(key);
  if (spec == nullptr) throw ConfigError(key, "unknown configuration key");
  values_[key] = Canonical(*spec, value);
  explicit_.insert(key);
}

void RunConfig::LoadText(const std::string& text, const std::string& origin) {
  std::set<std::string> seen;
  for (const auto& [k, v] : ParseKeyValues(text, origin)) {
    if (!seen.insert(k).second) throw ConfigError(k, "repeated in " + origin);
    Set(k, v);
  }
}

void RunConfig::LoadFile(const std::string& path) { LoadText(ReadTextFile(path), path); }

const std::string& RunConfig::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
  return it->second;
}

double RunConfig::Double(const std::string& key) const {
  double d = 0.0;
  if (!ParseDouble(Get(key), d)) throw ConfigError(key, "not a number");
  return d;
}

std::size_t RunConfig::Unsigned(const std::string& key) const {
  std::uint64_t u = 0;
  if (!ParseUnsigned(Get(key), u)) throw ConfigError(key, "not an integer");
  return static_cast<std::size_t>(u);
}

bool RunConfig::Bool(const std::string& key) const { return Get(key) == "true"; }

std::vector<std::string> RunConfig::List(const std::string& key) const {
  std::vector<std::string> out = SplitOn(Get(key), ',');
  for (const std::string& s : out) {
    if (s.empty()) throw ConfigError(key, "empty list entry");
  }
  return out;
}

std::vector<Endpoint> RunConfig::Endpoints() const {
  std::vector<Endpoint> out;
  for (const std::string& item : List("transport.endpoints")) {
    const auto colon = item.rfind(':');
    std::uint64_t port = 0;
    if (colon == std::string::npos || colon == 0 ||
        !ParseUnsigned(item.substr(colon + 1), port) || port == 0 || port > 65535) {
      throw ConfigError("transport.endpoints", "expected host:port, got '" + item + "'");
    }
    out.push_back({item.substr(0, colon), static_cast<std::uint16_t>(port)});
  }
  return out;
}

void RunConfig::Validate() const {
  if (!Bool("privacy.enabled")) {
    for (const char* k : {"privacy.epsilon", "privacy.delta", "privacy.clip", "privacy.c2"}) {
      Require(!IsExplicit(k), k, "set while privacy.enabled is false");
    }
  }
  Require(Double("privacy.epsilon") > 0, "privacy.epsilon", "must be positive");
  const double delta = Double("privacy.delta");
  Require(delta > 0 && delta < 1, "privacy.delta", "must be in (0, 1)");
  Require(Double("privacy.clip") > 0, "privacy.clip", "must be positive");
  Require(Double("privacy.c2") > 0, "privacy.c2", "must be positive");

  Require(Unsigned("data.subjects") >= 10, "data.subjects", "must be at least 10");
  const double cens = Double("data.censoring");
  Require(cens >= 0 && cens < 1, "data.censoring", "must be in [0, 1)");
  List("data.modalities");

  Require(Unsigned("model.intervals") >= 1, "model.intervals", "must be positive");
  Require(Unsigned("model.embedding_width") >= 1, "model.embedding_width", "must be positive");
  Require(Unsigned("model.clinical_embedding_width") >= 1, "model.clinical_embedding_width",
          "must be positive");
  Require(Unsigned("model.clinical_hidden_width") >= 1, "model.clinical_hidden_width",
          "must be positive");
  const double dropout = Double("model.dropout");
  Require(dropout >= 0 && dropout < 1, "model.dropout", "must be in [0, 1)");
  Require(Double("model.aux_weight") >= 0, "model.aux_weight", "must be non-negative");

  Require(Unsigned("train.epochs") >= 1, "train.epochs", "must be positive");
  Require(Unsigned("train.batch_size") >= 1, "train.batch_size", "must be positive");
  Require(Double("train.learning_rate") >= 0, "train.learning_rate", "must be non-negative");
  Require(Double("train.weight_decay") >= 0, "train.weight_decay", "must be non-negative");

  if (Get("transport.kind") == "tcp") {
    Require(vfl(), "transport.kind", "tcp transport needs run.mode = vfl");
    const auto endpoints = Endpoints();
    Require(Bool("transport.spawn") || !endpoints.empty(), "transport.endpoints",
            "externally launched clients need an endpoint per client");
  } else {
    Require(Get("transport.endpoints").empty(), "transport.endpoints",
            "only used with transport.kind = tcp");
  }

  const double frac = Double("attack.public_fraction");
  Require(frac > 0 && frac < 1, "attack.public_fraction", "must be in (0, 1)");
  Require(Unsigned("attack.decoder_epochs") >= 1, "attack.decoder_epochs", "must be positive");
  Require(Double("attack.decoder_learning_rate") > 0, "attack.decoder_learning_rate",
          "must be positive");

  Require(Double("bound.sigma") >= 0, "bound.sigma", "must be non-negative");
  Require(Unsigned("bound.seeds") >= 1, "bound.seeds", "must be positive");
  const double alpha = Double("bound.alpha");
  Require(alpha > 0, "bound.alpha", "must be positive");
  Require(Double("bound.beta") >= alpha, "bound.beta", "must be at least bound.alpha");
}

std::uint64_t RunConfig::Digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const KeySpec& k : kKeys) {
    if (!k.digested) continue;
    mix(k.key);
    mix("=");
    mix(values_.at(std::string(k.key)));
    mix("\n");
  }
  return h;
}

std::string RunConfig::ToText() const {
  std::ostringstream os;
  for (const KeySpec& k : kKeys) os << k.key << " = " << values_.at(std::string(k.key)) << "\n";
  return os.str();
}

double RunConfig::ResolvedLearningRate() const {
  const double lr = Double("train.learning_rate");
  if (lr > 0) return lr;
  return vfl() ? kVflLearningRate : kCentralizedLearningRate;
}

CohortSpec RunConfig::Cohort() const {
  CohortSpec s = DefaultCohortSpec(!Bool("data.full_width"));
  s.subjects = Unsigned("data.subjects");
  s.seed = Unsigned("data.seed");
  s.censoring = Double("data.censoring");
  return s;
}

LoadOptions RunConfig::Loading() const {
  LoadOptions o;
  o.top_variance = Unsigned("data.top_variance");
  o.modalities = List("data.modalities");
  return o;
}

ModelConfig RunConfig::Model() const {
  ModelConfig m;
  m.intervals = Unsigned("model.intervals");
  m.embedding_width = Unsigned("model.embedding_width");
  m.head_hidden_layers = Unsigned("model.head_hidden_layers");
  m.clinical_embedding_width = Unsigned("model.clinical_embedding_width");
  m.clinical_hidden_width = Unsigned("model.clinical_hidden_width");
  m.hidden_width_override = Unsigned("model.hidden_width");
  m.dropout = Double("model.dropout");
  m.aux_weight = Double("model.aux_weight");
  return m;
}

TrainOptions RunConfig::Training() const {
  TrainOptions o;
  o.epochs = Unsigned("train.epochs");
  o.batch_size = Unsigned("train.batch_size");
  o.learning_rate = Double("train.learning_rate");
  o.weight_decay = Double("train.weight_decay");
  o.patience = Unsigned("train.patience");
  o.mode = Get("model.weights") == "mean" ? WeightMode::kMean : WeightMode::kSample;
  o.dp = Bool("privacy.enabled");
  o.epsilon = Double("privacy.epsilon");
  o.delta = Double("privacy.delta");
  o.clip = Double("privacy.clip");
  o.c2 = Double("privacy.c2");
  o.seed = seed();
  o.digest = Digest();
  return o;
}

AttackConfig RunConfig::Attack() const {
  AttackConfig a;
  a.target = Unsigned("attack.target");
  a.public_fraction = Double("attack.public_fraction");
  a.decoder_epochs = Unsigned("attack.decoder_epochs");
  a.decoder_learning_rate = Double("attack.decoder_learning_rate");
  a.seed = seed();
  return a;
}

ConvergenceToy RunConfig::Toy() const {
  ConvergenceToy t;
  t.clients = Unsigned("bound.clients");
  t.embedding_dim = Unsigned("bound.embedding_dim");
  t.samples = Unsigned("bound.samples");
  t.alpha = Double("bound.alpha");
  t.beta = Double("bound.beta");
  t.sigma = Double("bound.sigma");
  t.clip = Double("bound.clip");
  t.epochs = Unsigned("bound.epochs");
  return t;
}

}  // namespace bvfl
