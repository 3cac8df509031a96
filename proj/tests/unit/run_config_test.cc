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

#include <gtest/gtest.h>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

TEST(RunConfigTest, EmptyFileResolvesToTheDocumentedDefaults) {
  RunConfig cfg;
  cfg.LoadText("", "empty");
  cfg.Validate();
  const ModelConfig m = cfg.Model();
  const TrainOptions t = cfg.Training();
  EXPECT_EQ(m.intervals, 30u);
  EXPECT_EQ(t.delta, 1e-5);
  EXPECT_EQ(t.clip, 1.0);
  EXPECT_EQ(t.c2, 1.0);
  EXPECT_FALSE(t.dp);
  EXPECT_EQ(t.batch_size, 64u);
  EXPECT_EQ(cfg.ResolvedLearningRate(), 0.005);
  cfg.Set("run.mode", "vfl");
  EXPECT_EQ(cfg.ResolvedLearningRate(), 0.001);
  cfg.Set("train.learning_rate", "0.02");
  EXPECT_EQ(cfg.ResolvedLearningRate(), 0.02);
}

TEST(RunConfigTest, EpsilonWithoutPrivacyIsRejected) {
  RunConfig cfg;
  cfg.LoadText("privacy.epsilon = 10\n", "f");
  try {
    cfg.Validate();
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "privacy.epsilon");
  }
  cfg.Set("privacy.enabled", "on");
  EXPECT_NO_THROW(cfg.Validate());
  EXPECT_TRUE(cfg.Training().dp);
  EXPECT_EQ(cfg.Training().epsilon, 10.0);
}

TEST(RunConfigTest, DigestDependsOnSettingsNotSpellingOrPaths) {
  RunConfig a, b;
  a.LoadText("run.seed = 7\nprivacy.enabled = true\nprivacy.delta = 1e-5\n", "a");
  b.LoadText("# comment\nprivacy.delta=0.00001\nprivacy.enabled = on  \nrun.seed=7\n"
             "run.output = /elsewhere\ndata.path = /data\n", "b");
  EXPECT_EQ(a.Digest(), b.Digest());
  EXPECT_EQ(a.Get("privacy.delta"), b.Get("privacy.delta"));
  b.Set("run.seed", "8");
  EXPECT_NE(a.Digest(), b.Digest());
}

TEST(RunConfigTest, TextRoundTripReproducesTheDigest) {
  RunConfig a;
  a.LoadText("run.mode = vfl\nmodel.embedding_width = 64\nprivacy.enabled = true\n"
             "privacy.epsilon = 0.5\ntransport.kind = tcp\n", "a");
  a.Validate();
  RunConfig b;
  b.LoadText(a.ToText(), "manifest");
  EXPECT_EQ(a.ToText(), b.ToText());
  EXPECT_EQ(a.Digest(), b.Digest());
}

TEST(RunConfigTest, MalformedInputNamesTheKey) {
  RunConfig cfg;
  auto key_of = [&](const std::string& k, const std::string& v) {
    try {
      cfg.Set(k, v);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("none");
  };
  EXPECT_EQ(key_of("train.epochs", "ten"), "train.epochs");
  EXPECT_EQ(key_of("train.epochs", "-3"), "train.epochs");
  EXPECT_EQ(key_of("model.dropout", "nan"), "model.dropout");
  EXPECT_EQ(key_of("run.mode", "federated"), "run.mode");
  EXPECT_EQ(key_of("privacy.enabled", "maybe"), "privacy.enabled");
  EXPECT_EQ(key_of("no.such.key", "1"), "no.such.key");
  EXPECT_THROW(cfg.LoadText("just words\n", "f"), DataError);
  EXPECT_THROW(cfg.LoadText("run.seed = 1\nrun.seed = 2\n", "f"), ConfigError);
}

TEST(RunConfigTest, CrossKeyChecks) {
  {
    RunConfig cfg;
    cfg.Set("transport.kind", "tcp");
    EXPECT_THROW(cfg.Validate(), ConfigError);
    cfg.Set("run.mode", "vfl");
    EXPECT_NO_THROW(cfg.Validate());
    cfg.Set("transport.spawn", "false");
    EXPECT_THROW(cfg.Validate(), ConfigError);
    cfg.Set("transport.endpoints", "127.0.0.1:9001, 127.0.0.1:9002");
    EXPECT_NO_THROW(cfg.Validate());
    ASSERT_EQ(cfg.Endpoints().size(), 2u);
    EXPECT_EQ(cfg.Endpoints()[1].port, 9002);
    cfg.Set("transport.endpoints", "localhost:99999");
    EXPECT_THROW(cfg.Validate(), ConfigError);
  }
  {
    RunConfig cfg;
    cfg.Set("model.dropout", "1");
    EXPECT_THROW(cfg.Validate(), ConfigError);
  }
  {
    RunConfig cfg;
    cfg.Set("privacy.enabled", "true");
    cfg.Set("privacy.delta", "1");
    EXPECT_THROW(cfg.Validate(), ConfigError);
  }
}

TEST(RunConfigTest, StructuredViews) {
  RunConfig cfg;
  cfg.LoadText("data.subjects = 300\ndata.modalities = clinical, mirna\n"
               "bound.sigma = 1\nbound.epochs = 20\nattack.target = 0\n", "f");
  cfg.Validate();
  EXPECT_EQ(cfg.Cohort().subjects, 300u);
  EXPECT_EQ(cfg.Loading().modalities, (std::vector<std::string>{"clinical", "mirna"}));
  EXPECT_EQ(cfg.Toy().sigma, 1.0);
  EXPECT_EQ(cfg.Toy().epochs, 20u);
  EXPECT_EQ(cfg.Attack().target, 0u);
  EXPECT_EQ(cfg.Training().digest, cfg.Digest());
  EXPECT_EQ(HexDigest(0xabcull), "0000000000000abc");
}

}  // namespace
}  // namespace bvfl
