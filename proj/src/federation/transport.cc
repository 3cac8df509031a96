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

#include "bvfl/federation/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

std::string Errno(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

void WriteAll(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError(Errno("send failed"));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

void ReadAll(int fd, std::uint8_t* data, std::size_t n, int timeout_ms) {
  while (n > 0) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw TransportError(Errno("poll failed"));
    }
    if (ready == 0) throw TransportError("receive timed out");
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(Errno("recv failed"));
    }
    if (r == 0) throw TransportError("connection closed by peer");
    data += r;
    n -= static_cast<std::size_t>(r);
  }
}

}  // namespace

void InProcessChannel::Send(const Frame& frame) {
  for (Frame& f : handler_.Handle(frame)) inbox_.push_back(std::move(f));
}

Frame InProcessChannel::Receive() {
  if (inbox_.empty()) throw TransportError("no pending frame from client");
  Frame f = std::move(inbox_.front());
  inbox_.pop_front();
  return f;
}

TcpChannel::TcpChannel(int fd, TcpOptions options) : fd_(fd), options_(options) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpChannel::Connect(const std::string& host,
                                                std::uint16_t port,
                                                TcpOptions options) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last;
  for (int attempt = 0; attempt < std::max(1, options.connect_retries); ++attempt) {
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
      ::freeaddrinfo(res);
      throw TransportError(Errno("socket failed"));
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpChannel>(fd, options);
    }
    last = Errno("connect failed");
    ::close(fd);
    std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_delay_ms));
  }
  ::freeaddrinfo(res);
  throw TransportError(last + " (" + host + ":" + service + ")");
}

void TcpChannel::Send(const Frame& frame) {
  const std::vector<std::uint8_t> bytes = EncodeFrame(frame);
  if (bytes.size() > kMaxFrameBytes) throw TransportError("frame too large");
  std::uint8_t len[4];
  const auto n = static_cast<std::uint32_t>(bytes.size());
  for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(n >> (8 * i));
  WriteAll(fd_, len, 4);
  WriteAll(fd_, bytes.data(), bytes.size());
}

Frame TcpChannel::Receive() {
  std::uint8_t len[4];
  ReadAll(fd_, len, 4, options_.timeout_ms);
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(len[i]) << (8 * i);
  if (n > kMaxFrameBytes) throw TransportError("announced frame too large");
  std::vector<std::uint8_t> bytes(n);
  ReadAll(fd_, bytes.data(), n, options_.timeout_ms);
  return DecodeFrame(bytes);
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(Errno("socket failed"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw TransportError("invalid listen address " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 16) != 0) {
    const std::string msg = Errno("cannot listen on " + host + ":" + std::to_string(port));
    ::close(fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpListener::Accept(TcpOptions options) {
  pollfd p{fd_, POLLIN, 0};
  int ready;
  do {
    ready = ::poll(&p, 1, options.timeout_ms);
  } while (ready < 0 && errno == EINTR);
  if (ready < 0) throw TransportError(Errno("poll failed"));
  if (ready == 0) throw TransportError("timed out waiting for a client");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw TransportError(Errno("accept failed"));
  return std::make_unique<TcpChannel>(fd, options);
}

void ServeChannel(Channel& channel, FrameHandler& handler) {
  while (!handler.finished()) {
    const Frame in = channel.Receive();
    for (const Frame& out : handler.Handle(in)) channel.Send(out);
  }
}

}  // namespace bvfl
