// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <utility>

#include "mrv/error.hpp"

namespace mrv {

/// Thin RAII wrapper over a connected TCP socket.
class TcpStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  TcpStream& operator=(TcpStream&& o) noexcept {
    if (this != &o) {
      close_fd();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() { close_fd(); }

  static TcpStream connect(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
      raise(Errc::ConnectionLost, "cannot resolve " + host);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
      freeaddrinfo(res);
      raise(Errc::ConnectionLost, "socket() failed");
    }
    int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    freeaddrinfo(res);
    if (rc != 0) {
      ::close(fd);
      raise(Errc::ConnectionLost, "connect to " + host + ":" + std::to_string(port) + " failed");
    }
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpStream(fd);
  }

  void set_recv_timeout_ms(int ms) {
    timeval tv{};
    tv.tv_sec = ms / 1000;
    tv.tv_usec = (ms % 1000) * 1000;
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }

  void write_all(const uint8_t* data, size_t len) {
    size_t sent = 0;
    while (sent < len) {
      ssize_t n = ::send(fd_, data + sent, len - sent, MSG_NOSIGNAL);
      if (n <= 0) raise(Errc::ConnectionLost, "send failed: " + std::string(strerror(errno)));
      sent += static_cast<size_t>(n);
    }
  }

  void read_exact(uint8_t* data, size_t len) {
    size_t got = 0;
    while (got < len) {
      ssize_t n = ::recv(fd_, data + got, len - got, 0);
      if (n == 0) raise(Errc::ConnectionLost, "peer closed the connection");
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK)
          raise(Errc::Timeout, "receive timed out");
        raise(Errc::ConnectionLost, "recv failed: " + std::string(strerror(errno)));
      }
      got += static_cast<size_t>(n);
    }
  }

  int fd() const { return fd_; }

 private:
  void close_fd() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }
  int fd_ = -1;
};

class TcpListener {
 public:
  TcpListener() = default;
  TcpListener(TcpListener&& o) noexcept : fd_(std::exchange(o.fd_, -1)), port_(o.port_) {}
  TcpListener& operator=(TcpListener&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      port_ = o.port_;
    }
    return *this;
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() { close(); }

  /// port 0 binds an ephemeral port; query it with port().
  static TcpListener bind(const std::string& host, uint16_t port, int backlog = 16) {
    TcpListener l;
    l.fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (l.fd_ < 0) raise(Errc::ConnectionLost, "socket() failed");
    int one = 1;
    setsockopt(l.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      raise(Errc::ConnectionLost, "bad bind address " + host);
    if (::bind(l.fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      raise(Errc::ConnectionLost, "bind " + host + ":" + std::to_string(port) + " failed");
    if (::listen(l.fd_, backlog) != 0) raise(Errc::ConnectionLost, "listen failed");
    socklen_t len = sizeof addr;
    getsockname(l.fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    l.port_ = ntohs(addr.sin_port);
    return l;
  }

  /// Blocks for the next connection; empty once the listener is closed.
  std::optional<TcpStream> accept() {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) return std::nullopt;
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpStream(fd);
  }

  void close() {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

  uint16_t port() const { return port_; }
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

inline std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint) {
  auto pos = endpoint.rfind(':');
  if (pos == std::string::npos || pos + 1 >= endpoint.size())
    raise(Errc::ConfigInvalid, "endpoint must be host:port, got '" + endpoint + "'");
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(pos + 1));
  } catch (...) {
    raise(Errc::ConfigInvalid, "bad port in endpoint '" + endpoint + "'");
  }
  if (port < 0 || port > 65535) raise(Errc::ConfigInvalid, "port out of range");
  return {endpoint.substr(0, pos), static_cast<uint16_t>(port)};
}

}  // namespace mrv
