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

#ifndef BVFL_FEDERATION_WIRE_H_
#define BVFL_FEDERATION_WIRE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bvfl/autodiff/tensor.h"

namespace bvfl {

inline constexpr std::uint8_t kWireVersion = 1;

enum class FrameType : std::uint8_t {
  kEmbedding = 0x01,
  kGradient = 0x02,
  kControl = 0x03,
  kKlAck = 0x04,
};

// One protocol frame. The payload is held in double precision; encoding
// narrows it to 32-bit floats.
struct Frame {
  FrameType type = FrameType::kControl;
  std::uint32_t round = 0;
  std::uint16_t client = 0;
  std::vector<std::uint64_t> subjects;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> payload;  // rows * cols, row-major

  bool operator==(const Frame&) const = default;
};

// "BVFM" | version | type | round | client | count | ids | rows | cols |
// f32 payload | CRC32, all little-endian.
std::vector<std::uint8_t> EncodeFrame(const Frame& frame);
// Throws DecodeError (with byte offset) on bad magic, version, type,
// truncation, trailing bytes or checksum mismatch.
Frame DecodeFrame(std::span<const std::uint8_t> bytes);

struct EmbeddingMessage {
  std::uint32_t round = 0;
  std::uint16_t client = 0;
  std::vector<std::uint64_t> subjects;
  Tensor embeddings;  // one row per subject
  double kl = 0.0;
};

struct GradientMessage {
  std::uint32_t round = 0;
  std::uint16_t client = 0;
  std::vector<std::uint64_t> subjects;
  Tensor gradients;  // mirrors the embedding rows
};

enum class Command : std::uint8_t {
  kStart = 2,     // server -> client, carries the config digest
  kTrainRound = 3,
  kEvaluate = 4,
  kSnapshot = 5,  // keep the current parameters as the best so far
  kRestore = 6,   // return to the kept parameters
  kStop = 7,
  kAck = 8,
};

struct ControlMessage {
  Command command = Command::kAck;
  std::uint32_t round = 0;
  std::uint16_t client = 0;
  std::vector<std::uint64_t> subjects;
  std::uint32_t epoch = 0;
  std::uint32_t batch = 0;
  std::uint64_t digest = 0;
};

// An embedding message travels as an embedding frame followed by a kl-ack
// frame holding the client's KL scalar.
std::vector<Frame> ToFrames(const EmbeddingMessage& m);
EmbeddingMessage EmbeddingFromFrames(const Frame& embedding, const Frame& kl);
Frame ToFrame(const GradientMessage& m);
GradientMessage GradientFromFrame(const Frame& f);
Frame ToFrame(const ControlMessage& m);
ControlMessage ControlFromFrame(const Frame& f);

}  // namespace bvfl

#endif  // BVFL_FEDERATION_WIRE_H_
