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

// Minimal RFC 6455 endpoint: opening handshake, text messages (with
// fragmentation), ping/pong and close. Binary messages are refused.

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "domino101/net.hpp"

namespace domino101::net {
namespace {

constexpr const char* kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxHandshakeBytes = 8192;

enum Opcode : int { kContinuation = 0, kText = 1, kBinary = 2, kClose = 8, kPing = 9, kPong = 10 };

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3) + 1, '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct HttpHead {
  std::string start_line;
  std::vector<std::pair<std::string, std::string>> headers;  // lower-cased names
  std::string leftover;  // bytes after the blank line

  std::string get(const std::string& name) const {
    for (const auto& [k, v] : headers) {
      if (k == name) return v;
    }
    return {};
  }
};

std::optional<HttpHead> read_head(Socket& s) {
  std::string buf;
  std::size_t end;
  while ((end = buf.find("\r\n\r\n")) == std::string::npos) {
    if (buf.size() > kMaxHandshakeBytes) return std::nullopt;
    std::string chunk = s.recv_some();
    if (chunk.empty()) return std::nullopt;
    buf += chunk;
  }
  HttpHead head;
  head.leftover = buf.substr(end + 4);
  std::string_view text(buf.data(), end);
  bool first = true;
  while (!text.empty()) {
    const std::size_t nl = text.find("\r\n");
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 2);
    if (first) {
      head.start_line = std::string(line);
      first = false;
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    head.headers.emplace_back(lower(trim(line.substr(0, colon))), trim(line.substr(colon + 1)));
  }
  return head;
}

bool header_has_token(const std::string& value, const std::string& token) {
  std::string v = lower(value);
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    if (trim(std::string_view(v).substr(start, comma - start)) == token) return true;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return false;
}

void http_error(Socket& s, const char* status) {
  s.send_all(std::string("HTTP/1.1 ") + status + "\r\nConnection: close\r\nContent-Length: 0\r\n\r\n");
}

}  // namespace

std::string websocket_accept_key(std::string_view client_key) {
  const std::string input = std::string(client_key) + kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  return base64(digest, sizeof digest);
}

std::unique_ptr<Transport> websocket_server_handshake(Socket s, std::string_view path) {
  const auto head = read_head(s);
  if (!head) {
    http_error(s, "400 Bad Request");
    return nullptr;
  }
  // "GET <path> HTTP/1.1"
  const std::size_t sp1 = head->start_line.find(' ');
  const std::size_t sp2 = head->start_line.find(' ', sp1 + 1);
  if (sp1 == std::string::npos || sp2 == std::string::npos || head->start_line.substr(0, sp1) != "GET") {
    http_error(s, "400 Bad Request");
    return nullptr;
  }
  std::string target = head->start_line.substr(sp1 + 1, sp2 - sp1 - 1);
  target = target.substr(0, target.find('?'));
  if (target != path) {
    http_error(s, "404 Not Found");
    return nullptr;
  }
  const std::string key = head->get("sec-websocket-key");
  if (!header_has_token(head->get("upgrade"), "websocket") || !header_has_token(head->get("connection"), "upgrade") ||
      key.empty() || head->get("sec-websocket-version") != "13") {
    http_error(s, "400 Bad Request");
    return nullptr;
  }
  const std::string reply =
      "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Accept: " +
      websocket_accept_key(key) + "\r\n\r\n";
  if (!s.send_all(reply)) return nullptr;
  return std::make_unique<WebSocketTransport>(std::move(s), WebSocketTransport::Role::Server, head->leftover);
}

std::unique_ptr<Transport> websocket_connect(const std::string& host, int port, std::string_view path) {
  Socket s = connect_tcp(host, port);
  unsigned char nonce[16];
  if (RAND_bytes(nonce, sizeof nonce) != 1) throw NetError("no randomness for the websocket key");
  const std::string key = base64(nonce, sizeof nonce);
  const std::string request = "GET " + std::string(path) + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                              "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                              "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  if (!s.send_all(request)) throw NetError("websocket handshake send failed");
  const auto head = read_head(s);
  if (!head || head->start_line.rfind("HTTP/1.1 101", 0) != 0) {
    throw NetError("websocket upgrade refused: " + (head ? head->start_line : std::string("no response")));
  }
  if (head->get("sec-websocket-accept") != websocket_accept_key(key)) throw NetError("bad Sec-WebSocket-Accept");
  return std::make_unique<WebSocketTransport>(std::move(s), WebSocketTransport::Role::Client, head->leftover);
}

// ---------------------------------------------------------------------------
// Framing

bool WebSocketTransport::fill(std::size_t n) {
  while (buf_.size() < n) {
    std::string chunk = sock_.recv_some();
    if (chunk.empty()) return false;
    buf_ += chunk;
  }
  return true;
}

bool WebSocketTransport::send_frame(int opcode, std::string_view payload) {
  std::string frame;
  frame.push_back(static_cast<char>(0x80 | opcode));
  const unsigned char mask_bit = role_ == Role::Client ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    frame.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    frame.push_back(static_cast<char>(mask_bit | 126));
    frame.push_back(static_cast<char>((n >> 8) & 0xFF));
    frame.push_back(static_cast<char>(n & 0xFF));
  } else {
    frame.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) frame.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  if (role_ == Role::Client) {
    unsigned char mask[4];
    RAND_bytes(mask, sizeof mask);
    frame.append(reinterpret_cast<char*>(mask), 4);
    for (std::size_t i = 0; i < n; ++i) frame.push_back(static_cast<char>(payload[i] ^ mask[i % 4]));
  } else {
    frame.append(payload);
  }
  std::lock_guard lock(write_mu_);
  return sock_.send_all(frame);
}

std::optional<std::string> WebSocketTransport::read_message() {
  std::string message;
  bool in_message = false;
  bool oversize = false;
  while (true) {
    if (!fill(2)) return std::nullopt;
    const auto b0 = static_cast<unsigned char>(buf_[0]);
    const auto b1 = static_cast<unsigned char>(buf_[1]);
    const bool fin = b0 & 0x80;
    const int opcode = b0 & 0x0F;
    const bool masked = b1 & 0x80;
    std::uint64_t len = b1 & 0x7F;
    std::size_t header = 2;
    if (len == 126) {
      if (!fill(4)) return std::nullopt;
      len = (static_cast<unsigned char>(buf_[2]) << 8) | static_cast<unsigned char>(buf_[3]);
      header = 4;
    } else if (len == 127) {
      if (!fill(10)) return std::nullopt;
      len = 0;
      for (int i = 2; i < 10; ++i) len = (len << 8) | static_cast<unsigned char>(buf_[i]);
      header = 10;
    }
    // Clients must mask; servers must not.
    if (masked != (role_ == Role::Server) || len > 4 * kMaxMessageBytes) {
      send_frame(kClose, std::string("\x03\xea", 2));  // 1002 protocol error
      return std::nullopt;
    }
    const std::size_t mask_len = masked ? 4 : 0;
    if (!fill(header + mask_len + len)) return std::nullopt;
    std::string payload = buf_.substr(header + mask_len, len);
    if (masked) {
      const std::string mask = buf_.substr(header, 4);
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
    }
    buf_.erase(0, header + mask_len + len);

    switch (opcode) {
      case kPing:
        send_frame(kPong, payload);
        continue;
      case kPong:
        continue;
      case kClose:
        send_frame(kClose, payload.substr(0, 2));
        return std::nullopt;
      case kText:
      case kContinuation:
        if ((opcode == kText) == in_message) {
          send_frame(kClose, std::string("\x03\xea", 2));
          return std::nullopt;
        }
        in_message = true;
        if (message.size() + payload.size() > kMaxMessageBytes) {
          oversize = true;
          message.resize(kMaxMessageBytes + 1, ' ');
        } else if (!oversize) {
          message += payload;
        }
        if (fin) return message;
        continue;
      default:  // binary or reserved
        send_frame(kClose, std::string("\x03\xeb", 2));  // 1003 unsupported data
        return std::nullopt;
    }
  }
}

bool WebSocketTransport::write_message(std::string_view msg) {
  if (!msg.empty() && msg.back() == '\n') msg.remove_suffix(1);
  return send_frame(kText, msg);
}

}  // namespace domino101::net
