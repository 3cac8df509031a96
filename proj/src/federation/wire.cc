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

#include "bvfl/federation/wire.h"

#include <zlib.h>

#include <cmath>
#include <cstring>

#include "bvfl/common/bytes.h"
#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr char kMagic[4] = {'B', 'V', 'F', 'M'};
// Header through the subject count.
constexpr std::size_t kFixedHeader = 4 + 1 + 1 + 4 + 2 + 4;

std::uint32_t Crc(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed large buffers in pieces.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

bool ValidType(std::uint8_t t) { return t >= 0x01 && t <= 0x04; }

Frame MatrixFrame(FrameType type, std::uint32_t round, std::uint16_t client,
                  const std::vector<std::uint64_t>& subjects, const Tensor& m) {
  if (m.ndim() != 2) throw DimensionError("message payload must be a matrix");
  Frame f;
  f.type = type;
  f.round = round;
  f.client = client;
  f.subjects = subjects;
  f.rows = static_cast<std::uint32_t>(m.rows());
  f.cols = static_cast<std::uint32_t>(m.cols());
  f.payload.assign(m.data().begin(), m.data().end());
  return f;
}

Tensor FrameMatrix(const Frame& f) {
  Tensor t({f.rows, f.cols});
  std::copy(f.payload.begin(), f.payload.end(), t.mutable_data().begin());
  return t;
}

void Expect(const Frame& f, FrameType type, const char* what) {
  if (f.type != type) {
    throw ProtocolError(std::string("expected ") + what + " frame, got type " +
                        std::to_string(static_cast<int>(f.type)));
  }
}

}  // namespace

std::vector<std::uint8_t> EncodeFrame(const Frame& frame) {
  if (frame.payload.size() !=
      static_cast<std::size_t>(frame.rows) * static_cast<std::size_t>(frame.cols)) {
    throw DimensionError("frame payload size does not match rows x cols");
  }
  if (!ValidType(static_cast<std::uint8_t>(frame.type))) {
    throw PreconditionError("unknown frame type");
  }
  ByteWriter w;
  for (char c : kMagic) w.PutU8(static_cast<std::uint8_t>(c));
  w.PutU8(kWireVersion);
  w.PutU8(static_cast<std::uint8_t>(frame.type));
  w.PutU32(frame.round);
  w.PutU16(frame.client);
  w.PutU32(static_cast<std::uint32_t>(frame.subjects.size()));
  for (std::uint64_t id : frame.subjects) w.PutU64(id);
  w.PutU32(frame.rows);
  w.PutU32(frame.cols);
  for (double v : frame.payload) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) throw NumericError("frame payload is not finite in f32");
    w.PutF32(f);
  }
  w.PutU32(Crc(w.bytes()));
  return std::move(w).Release();
}

Frame DecodeFrame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kFixedHeader) throw DecodeError("truncated input", bytes.size());
  for (char c : kMagic) {
    const std::size_t at = r.offset();
    if (r.U8() != static_cast<std::uint8_t>(c)) throw DecodeError("bad magic", at);
  }
  if (const std::uint8_t v = r.U8(); v != kWireVersion) {
    throw DecodeError("unsupported version " + std::to_string(v), 4);
  }
  const std::uint8_t type = r.U8();
  if (!ValidType(type)) {
    throw DecodeError("unknown frame type " + std::to_string(type), 5);
  }
  Frame f;
  f.type = static_cast<FrameType>(type);
  f.round = r.U32();
  f.client = r.U16();
  const std::uint32_t count = r.U32();
  r.Need(static_cast<std::size_t>(count) * 8);
  f.subjects.resize(count);
  for (auto& id : f.subjects) id = r.U64();
  f.rows = r.U32();
  f.cols = r.U32();
  const std::size_t n = static_cast<std::size_t>(f.rows) * f.cols;
  r.Need(n * 4);
  f.payload.resize(n);
  for (double& v : f.payload) v = r.F32();
  const std::size_t crc_at = r.offset();
  const std::uint32_t crc = r.U32();
  if (r.remaining() != 0) throw DecodeError("trailing bytes", r.offset());
  if (crc != Crc(bytes.first(crc_at))) throw DecodeError("checksum mismatch", crc_at);
  return f;
}

std::vector<Frame> ToFrames(const EmbeddingMessage& m) {
  if (m.embeddings.rows() != m.subjects.size()) {
    throw DimensionError("embedding rows must match subject count");
  }
  Frame kl;
  kl.type = FrameType::kKlAck;
  kl.round = m.round;
  kl.client = m.client;
  kl.rows = 1;
  kl.cols = 1;
  kl.payload = {m.kl};
  return {MatrixFrame(FrameType::kEmbedding, m.round, m.client, m.subjects,
                      m.embeddings),
          kl};
}

EmbeddingMessage EmbeddingFromFrames(const Frame& embedding, const Frame& kl) {
  Expect(embedding, FrameType::kEmbedding, "embedding");
  Expect(kl, FrameType::kKlAck, "kl-ack");
  if (kl.round != embedding.round || kl.client != embedding.client ||
      kl.payload.size() != 1) {
    throw ProtocolError("kl-ack frame does not match its embedding frame");
  }
  if (embedding.rows != embedding.subjects.size()) {
    throw ProtocolError("embedding rows do not match subject count");
  }
  return {embedding.round, embedding.client, embedding.subjects,
          FrameMatrix(embedding), kl.payload[0]};
}

Frame ToFrame(const GradientMessage& m) {
  if (m.gradients.rows() != m.subjects.size()) {
    throw DimensionError("gradient rows must match subject count");
  }
  return MatrixFrame(FrameType::kGradient, m.round, m.client, m.subjects,
                     m.gradients);
}

GradientMessage GradientFromFrame(const Frame& f) {
  Expect(f, FrameType::kGradient, "gradient");
  if (f.rows != f.subjects.size()) {
    throw ProtocolError("gradient rows do not match subject count");
  }
  return {f.round, f.client, f.subjects, FrameMatrix(f)};
}

Frame ToFrame(const ControlMessage& m) {
  Frame f;
  f.type = FrameType::kControl;
  f.round = m.round;
  f.client = m.client;
  f.subjects = m.subjects;
  f.rows = 1;
  f.cols = 7;
  // 16-bit digest chunks stay exact in f32.
  f.payload = {static_cast<double>(m.command),
               static_cast<double>(m.epoch),
               static_cast<double>(m.batch),
               static_cast<double>(m.digest & 0xffff),
               static_cast<double>((m.digest >> 16) & 0xffff),
               static_cast<double>((m.digest >> 32) & 0xffff),
               static_cast<double>((m.digest >> 48) & 0xffff)};
  if (m.epoch >= (1u << 24) || m.batch >= (1u << 24)) {
    throw PreconditionError("control counters exceed the exact f32 range");
  }
  return f;
}

ControlMessage ControlFromFrame(const Frame& f) {
  Expect(f, FrameType::kControl, "control");
  if (f.payload.size() != 7) throw ProtocolError("malformed control payload");
  const double cmd = f.payload[0];
  if (!(cmd >= 2 && cmd <= 8) || cmd != std::floor(cmd)) {
    throw ProtocolError("unknown control command");
  }
  ControlMessage m;
  m.command = static_cast<Command>(static_cast<int>(cmd));
  m.round = f.round;
  m.client = f.client;
  m.subjects = f.subjects;
  m.epoch = static_cast<std::uint32_t>(f.payload[1]);
  m.batch = static_cast<std::uint32_t>(f.payload[2]);
  for (int i = 0; i < 4; ++i) {
    m.digest |= static_cast<std::uint64_t>(f.payload[3 + i]) << (16 * i);
  }
  return m;
}

}  // namespace bvfl
