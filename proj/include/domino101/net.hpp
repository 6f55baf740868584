// Copyright 2026 The domino101 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Message transports: newline-delimited TCP and WebSocket text frames
// (RFC 6455), for both the server and client ends.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace domino101::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Owns a socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(o.fd_.exchange(-1)) {}
  Socket& operator=(Socket&& o) noexcept;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  // Wakes up any thread blocked on the socket; safe from other threads.
  void shutdown();
  void close();

  bool send_all(std::string_view bytes);
  // Up to `max` bytes; empty on EOF or error.
  std::string recv_some(std::size_t max = 4096);

 private:
  std::atomic<int> fd_{-1};
};

// Listening socket bound to `port` (0 picks an ephemeral port).
Socket listen_tcp(const std::string& host, int port);
int local_port(const Socket& s);
// Waits up to `timeout_ms` for a connection; invalid socket on timeout.
Socket accept_with_timeout(const Socket& listener, int timeout_ms);
Socket connect_tcp(const std::string& host, int port);

class Transport {
 public:
  virtual ~Transport() = default;
  // One complete message without framing; nullopt when the peer is gone.
  virtual std::optional<std::string> read_message() = 0;
  // `msg` is an encoded protocol line; the trailing LF is framing for TCP
  // and dropped for WebSocket.
  virtual bool write_message(std::string_view msg) = 0;
  virtual void shutdown() = 0;
};

// Messages longer than this are reported as oversize lines and skipped.
inline constexpr std::size_t kMaxMessageBytes = 16 * 1024;

class LineTransport final : public Transport {
 public:
  explicit LineTransport(Socket s) : sock_(std::move(s)) {}
  std::optional<std::string> read_message() override;
  bool write_message(std::string_view msg) override;
  void shutdown() override { sock_.shutdown(); }

 private:
  Socket sock_;
  std::string buf_;
};

class WebSocketTransport final : public Transport {
 public:
  enum class Role { Server, Client };
  WebSocketTransport(Socket s, Role role, std::string leftover = {})
      : sock_(std::move(s)), role_(role), buf_(std::move(leftover)) {}
  std::optional<std::string> read_message() override;
  bool write_message(std::string_view msg) override;
  void shutdown() override { sock_.shutdown(); }

 private:
  bool fill(std::size_t n);
  bool send_frame(int opcode, std::string_view payload);

  Socket sock_;
  Role role_;
  std::string buf_;
  std::mutex write_mu_;  // control replies come from the reading thread
};

// Sec-WebSocket-Accept for a client key.
std::string websocket_accept_key(std::string_view client_key);

// Reads the HTTP upgrade request and answers it. Returns the transport, or
// nullptr after answering with an HTTP error.
std::unique_ptr<Transport> websocket_server_handshake(Socket s, std::string_view path);

std::unique_ptr<Transport> websocket_connect(const std::string& host, int port, std::string_view path);

}  // namespace domino101::net
