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

// JSONL transcript format shared by server logs and simulated matches.
//
// Each line is a protocol envelope with three annotations:
//   "ts"   RFC 3339 UTC timestamp (omitted in simulator transcripts)
//   "dir"  "out" (server to client), "in" (client to server) or "sys"
//   "seat" addressed seat, "*" for a broadcast, null for room-level records
// The envelope "seq" is the transcript line counter. Inbound lines carry the
// client's own sequence number as "client_seq"; copies resent to a
// reconnecting client are flagged "resync": true. The first line is a
// "log_header" sys record with the seed, generator and room configuration.

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "domino101/protocol.hpp"
#include "domino101/rng.hpp"

namespace domino101 {

inline std::string rfc3339_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

class Transcript {
 public:
  // Receives each complete line including the trailing LF. May throw; a
  // throwing writer means the record was not persisted.
  using Writer = std::function<void(const std::string&)>;

  Transcript(Writer writer, bool timestamps) : writer_(std::move(writer)), timestamps_(timestamps) {}

  void header(std::uint64_t seed, protocol::Json config) {
    protocol::Json data{{"seed", seed}, {"rng", kRngName}, {"protocol", protocol::kVersion},
                        {"config", std::move(config)}};
    write("log_header", std::move(data), "sys", protocol::Json(nullptr));
  }

  // `resync` marks copies resent to a reconnecting client; replay skips them.
  void out(std::optional<Seat> to, const protocol::ServerMessage& msg, bool resync = false) {
    protocol::Json extra = protocol::Json::object();
    if (resync) extra["resync"] = true;
    write(protocol::type_name(msg), std::visit([](const auto& m) { return protocol::to_data(m); }, msg), "out",
          to ? protocol::Json(to_string(*to)) : protocol::Json("*"), std::move(extra));
  }

  void in(Seat from, const protocol::ClientEnvelope& env) {
    protocol::Json extra{{"client_seq", env.seq}};
    write(protocol::type_name(env.msg), std::visit([](const auto& m) { return protocol::to_data(m); }, env.msg),
          "in", protocol::Json(to_string(from)), std::move(extra));
  }

  void sys(const std::string& type, protocol::Json data, std::optional<Seat> seat = std::nullopt) {
    write(type, std::move(data), "sys", seat ? protocol::Json(to_string(*seat)) : protocol::Json(nullptr));
  }

  std::uint64_t lines() const { return seq_; }

 private:
  void write(const std::string& type, protocol::Json data, const char* dir, protocol::Json seat,
             protocol::Json extra = protocol::Json::object()) {
    protocol::Json line{{"v", protocol::kVersion}, {"seq", seq_ + 1}, {"type", type}, {"data", std::move(data)}};
    if (timestamps_) line["ts"] = rfc3339_now();
    line["dir"] = dir;
    line["seat"] = std::move(seat);
    for (auto it = extra.begin(); it != extra.end(); ++it) line[it.key()] = *it;
    writer_(line.dump(-1, ' ', false, protocol::Json::error_handler_t::replace) + "\n");
    ++seq_;
  }

  Writer writer_;
  bool timestamps_;
  std::uint64_t seq_ = 0;
};

}  // namespace domino101
