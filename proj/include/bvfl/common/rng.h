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

#ifndef BVFL_COMMON_RNG_H_
#define BVFL_COMMON_RNG_H_

#include <cstdint>
#include <string_view>

namespace bvfl {

// Well-known stream labels. Every random draw in training comes from one of
// these, keyed further by party index and round, so that a centralized run
// and a federated run with the same master seed consume identical numbers.
inline constexpr std::string_view kStreamDropout = "dropout";
inline constexpr std::string_view kStreamBayes = "bayes-sample";
inline constexpr std::string_view kStreamDpNoise = "dp-noise";
inline constexpr std::string_view kStreamBatch = "batch-sample";
inline constexpr std::string_view kStreamInit = "init";

// Derives a 64-bit stream key from a master seed, a label and two indices.
std::uint64_t DeriveKey(std::uint64_t master, std::string_view label,
                        std::uint64_t a = 0, std::uint64_t b = 0);

// Counter-based generator: the n-th output is a pure function of (key, n).
// Cheap to construct, so streams are created per party and per round.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t NextU64();
  // Uniform in the open interval (0, 1).
  double Uniform();
  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();
  // Uniform integer in [0, n).
  std::uint64_t UniformIndex(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Factory for the named streams of one training session.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

  CounterRng Stream(std::string_view label, std::uint64_t party = 0,
                    std::uint64_t round = 0) const {
    return CounterRng(DeriveKey(master_, label, party, round));
  }
  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace bvfl

#endif  // BVFL_COMMON_RNG_H_
