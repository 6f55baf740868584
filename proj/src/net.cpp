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

#include "domino101/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace domino101::net {

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.fd_.exchange(-1);
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::shutdown() {
  const int fd = fd_;
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

void Socket::close() {
  const int fd = fd_.exchange(-1);
  if (fd >= 0) ::close(fd);
}

bool Socket::send_all(std::string_view bytes) {
  const int fd = fd_;
  if (fd < 0) return false;
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string Socket::recv_some(std::size_t max) {
  const int fd = fd_;
  if (fd < 0) return {};
  std::string buf(max, '\0');
  while (true) {
    const ssize_t n = ::recv(fd, buf.data(), max, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return {};
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }
}

Socket listen_tcp(const std::string& host, int port) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw NetError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw NetError("bad listen address " + host);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw NetError("cannot bind " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  if (::listen(s.fd(), 64) != 0) throw NetError(std::string("listen: ") + std::strerror(errno));
  return s;
}

int local_port(const Socket& s) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) return -1;
  return ntohs(addr.sin_port);
}

Socket accept_with_timeout(const Socket& listener, int timeout_ms) {
  pollfd p{listener.fd(), POLLIN, 0};
  if (::poll(&p, 1, timeout_ms) <= 0 || !(p.revents & POLLIN)) return Socket();
  Socket c(::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC));
  if (c.valid()) {
    const int one = 1;
    ::setsockopt(c.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return c;
}

Socket connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw NetError("cannot resolve " + host);
  }
  Socket s(::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol));
  const int rc = s.valid() ? ::connect(s.fd(), res->ai_addr, res->ai_addrlen) : -1;
  ::freeaddrinfo(res);
  if (rc != 0) throw NetError("cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

// ---------------------------------------------------------------------------
// Newline-delimited transport

std::optional<std::string> LineTransport::read_message() {
  while (true) {
    const std::size_t nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl + 1);
      buf_.erase(0, nl + 1);
      return line;
    }
    if (buf_.size() > kMaxMessageBytes) {
      // Report the oversize line once, then discard through its newline.
      std::string head = buf_;
      buf_.clear();
      while (true) {
        std::string chunk = sock_.recv_some();
        if (chunk.empty()) return head;
        const std::size_t end = chunk.find('\n');
        if (end != std::string::npos) {
          buf_ = chunk.substr(end + 1);
          return head;
        }
      }
    }
    std::string chunk = sock_.recv_some();
    if (chunk.empty()) return std::nullopt;
    buf_ += chunk;
  }
}

bool LineTransport::write_message(std::string_view msg) { return sock_.send_all(msg); }

}  // namespace domino101::net
