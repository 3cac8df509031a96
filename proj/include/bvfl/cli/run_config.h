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

#ifndef BVFL_CLI_RUN_CONFIG_H_
#define BVFL_CLI_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bvfl/attack/attack.h"
#include "bvfl/data/dataset.h"
#include "bvfl/federation/convergence.h"
#include "bvfl/federation/trainer.h"
#include "bvfl/model/model.h"
#include "bvfl/privacy/privacy.h"

namespace bvfl {

enum class KeyKind { kString, kPath, kBool, kUnsigned, kDouble, kChoice };

struct KeySpec {
  std::string_view key;
  std::string_view fallback;
  KeyKind kind;
  // kChoice: '|'-separated accepted values.
  std::string_view choices;
  // Paths and transport endpoints stay out of the digest.
  bool digested;
};

// Every recognised key, in manifest order.
std::span<const KeySpec> ConfigKeys();

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

// Flat key = value run configuration. Values are canonicalised on Set, so
// equal settings always print (and hash) identically.
class RunConfig {
 public:
  RunConfig();

  // ConfigError naming `key` on an unknown key or malformed value.
  void Set(const std::string& key, const std::string& value);
  // Lines of `key = value`; '#' starts a comment.
  void LoadFile(const std::string& path);
  void LoadText(const std::string& text, const std::string& origin);

  bool IsExplicit(const std::string& key) const { return explicit_.contains(key); }
  const std::string& Get(const std::string& key) const;
  double Double(const std::string& key) const;
  std::size_t Unsigned(const std::string& key) const;
  bool Bool(const std::string& key) const;
  // Comma-separated list; empty value gives an empty list.
  std::vector<std::string> List(const std::string& key) const;

  // Cross-key checks; ConfigError names the first offending key.
  void Validate() const;

  // FNV-1a 64 over the digested keys.
  std::uint64_t Digest() const;
  // Every key in manifest order, one `key = value` per line.
  std::string ToText() const;

  std::uint64_t seed() const { return Unsigned("run.seed"); }
  bool vfl() const { return Get("run.mode") == "vfl"; }
  double ResolvedLearningRate() const;
  std::vector<Endpoint> Endpoints() const;

  CohortSpec Cohort() const;
  LoadOptions Loading() const;
  ModelConfig Model() const;
  TrainOptions Training() const;
  AttackConfig Attack() const;
  ConvergenceToy Toy() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

// Parses `key = value` lines into pairs in file order. DataError on a line
// without '='.
std::vector<std::pair<std::string, std::string>> ParseKeyValues(
    const std::string& text, const std::string& origin);
std::string ReadTextFile(const std::string& path);

std::string HexDigest(std::uint64_t digest);

}  // namespace bvfl

#endif  // BVFL_CLI_RUN_CONFIG_H_
