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

// Room-based game host.
//
// Clients connect over newline-delimited TCP or WebSocket and send hello
// with an optional room name (default "main"). Rooms are created on demand.
// Each room owns one event loop thread that applies every state change in a
// single total order; connection readers and writers only exchange messages
// with it through queues. Every outgoing record is appended to the room log
// before it is handed to any connection.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "domino101/ai.hpp"
#include "domino101/protocol.hpp"
#include "domino101/rules.hpp"

namespace domino101::server {

// What happens when a human does not move within the time limit.
enum class TimeoutPolicy { AutoMove, Forfeit };

std::string to_string(TimeoutPolicy p);
std::optional<TimeoutPolicy> parse_timeout_policy(std::string_view s);

inline constexpr int kMinMoveTimeoutMs = 1000;

struct RoomConfig {
  int move_timeout_ms = 60000;
  PassMode pass_mode = PassMode::Strict;
  AiLevel ai_fill = AiLevel::L1;
  // Humans awaited before the remaining seats are filled with AI (1-4).
  int humans = 4;
  // Reconnection window after a human drops.
  int grace_ms = 30000;
  TimeoutPolicy timeout_policy = TimeoutPolicy::AutoMove;

  // Throws std::invalid_argument.
  void validate() const;
  protocol::Json to_json() const;
};

struct ServerConfig {
  std::string host = "0.0.0.0";
  int tcp_port = protocol::kDefaultTcpPort;  // 0 binds an ephemeral port
  int ws_port = protocol::kDefaultWsPort;    // 0 ephemeral, -1 disabled
  std::string log_dir = "logs";
  // Room seeds derive from this when set; otherwise they are drawn from
  // std::random_device. Either way the room seed is in the log header.
  std::optional<std::uint64_t> seed;
  RoomConfig room;

  void validate() const;
};

class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listeners and starts accepting. Throws net::NetError when a
  // port cannot be bound.
  void start();
  // Ends all rooms (logs stay valid prefixes) and joins every thread.
  void stop();

  int tcp_port() const;
  int ws_port() const;
  // Rooms whose event loop is still running.
  std::size_t active_rooms() const;
  // Matches finished since start.
  std::size_t finished_matches() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace domino101::server
