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

#ifndef BVFL_FEDERATION_TRANSPORT_H_
#define BVFL_FEDERATION_TRANSPORT_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "bvfl/federation/wire.h"

namespace bvfl {

// Bidirectional frame pipe between the server and one client.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void Send(const Frame& frame) = 0;
  // Blocks for the next frame; throws TransportError on failure.
  virtual Frame Receive() = 0;
};

// Consumes one inbound frame and returns the frames to send back.
class FrameHandler {
 public:
  virtual ~FrameHandler() = default;
  virtual std::vector<Frame> Handle(const Frame& frame) = 0;
  virtual bool finished() const = 0;
};

// Calls the handler synchronously and queues its replies. Frames are passed
// as objects, so payloads keep full double precision.
class InProcessChannel : public Channel {
 public:
  explicit InProcessChannel(FrameHandler& handler) : handler_(handler) {}
  void Send(const Frame& frame) override;
  Frame Receive() override;

 private:
  FrameHandler& handler_;
  std::deque<Frame> inbox_;
};

struct TcpOptions {
  int timeout_ms = 120000;   // per receive
  int connect_retries = 50;  // attempts before giving up
  int retry_delay_ms = 100;
};

// Length-prefixed (u32 LE) encoded frames over a TCP stream.
class TcpChannel : public Channel {
 public:
  TcpChannel(int fd, TcpOptions options);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  static std::unique_ptr<TcpChannel> Connect(const std::string& host,
                                             std::uint16_t port,
                                             TcpOptions options = {});
  void Send(const Frame& frame) override;
  Frame Receive() override;

 private:
  int fd_;
  TcpOptions options_;
};

class TcpListener {
 public:
  // Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<TcpChannel> Accept(TcpOptions options = {});

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Client loop: receive, handle, reply, until the handler finishes.
void ServeChannel(Channel& channel, FrameHandler& handler);

}  // namespace bvfl

#endif  // BVFL_FEDERATION_TRANSPORT_H_
