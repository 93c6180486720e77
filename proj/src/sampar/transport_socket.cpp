// Copyright (c) 2026 The sampar Authors. All Rights Reserved.
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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "sampar/errors.hpp"
#include "sampar/transport.hpp"

namespace sampar {
namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text() { return std::strerror(errno); }

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? static_cast<int>(left.count()) : 0;
}

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}

void wait_readable(int fd, Clock::time_point deadline, const std::string& what) {
  for (;;) {
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return;
    if (rc == 0) throw TransportError("timed out waiting for " + what);
    if (errno != EINTR) throw TransportError("poll failed: " + errno_text());
  }
}

void read_exact(int fd, std::byte* dst, std::size_t n, Clock::time_point deadline, const std::string& peer) {
  std::size_t got = 0;
  while (got < n) {
    wait_readable(fd, deadline, peer);
    const ssize_t rc = ::recv(fd, dst + got, n - got, 0);
    if (rc == 0) throw TransportError(peer + " disconnected");
    if (rc < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError("receive from " + peer + " failed: " + errno_text());
    }
    got += static_cast<std::size_t>(rc);
  }
}

void write_all(int fd, const std::byte* src, std::size_t n, const std::string& peer) {
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t rc = ::send(fd, src + sent, n - sent, MSG_NOSIGNAL);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("send to " + peer + " failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(rc);
  }
}

WireMessage read_frame(int fd, Clock::time_point deadline, const std::string& peer) {
  std::byte header[kWireHeaderSize];
  read_exact(fd, header, kWireHeaderSize, deadline, peer);
  const WireHeader h = decode_header(header);
  WireMessage m{h.opcode, h.rank, h.sequence, std::vector<double>(h.payload_len / 8)};
  std::vector<std::byte> payload(h.payload_len);
  read_exact(fd, payload.data(), payload.size(), deadline, peer);
  decode_payload(payload, m.payload);
  return m;
}

void write_frame(int fd, const WireMessage& m, const std::string& peer) {
  const auto bytes = encode(m);
  write_all(fd, bytes.data(), bytes.size(), peer);
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

std::string rank_name(int r) { return "rank " + std::to_string(r); }

}  // namespace

std::uint16_t pick_free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket: " + errno_text());
  sockaddr_in addr = loopback(0);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw TransportError("bind: " + errno_text());
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

SocketTransport::SocketTransport(int rank, int world_size, std::uint16_t port,
                                 std::chrono::milliseconds timeout)
    : rank_(rank), world_size_(world_size), peer_fds_(static_cast<std::size_t>(world_size), -1) {
  if (world_size < 1 || rank < 0 || rank >= world_size) {
    throw ContractError("invalid rank " + std::to_string(rank) + " for world size " +
                        std::to_string(world_size));
  }
  if (world_size == 1) return;
  const auto deadline = Clock::now() + timeout;
  try {
    if (rank == 0) {
      accept_peers(port, deadline);
    } else {
      connect_root(port, deadline);
    }
  } catch (...) {
    abort();
    throw;
  }
}

SocketTransport::~SocketTransport() {
  for (int fd : peer_fds_) {
    if (fd >= 0) ::close(fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void SocketTransport::accept_peers(std::uint16_t port, Clock::time_point deadline) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket: " + errno_text());
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = loopback(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError("cannot bind 127.0.0.1:" + std::to_string(port) + ": " + errno_text());
  }
  if (::listen(listen_fd_, world_size_) != 0) throw TransportError("listen: " + errno_text());

  for (int joined = 1; joined < world_size_; ++joined) {
    wait_readable(listen_fd_, deadline, "rank handshake");
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) throw TransportError("accept: " + errno_text());
    set_nodelay(fd);
    WireMessage hello;
    try {
      hello = read_frame(fd, deadline, "connecting peer");
    } catch (...) {
      ::close(fd);
      throw;
    }
    const int peer = static_cast<int>(hello.rank);
    const bool world_ok = hello.payload.size() == 1 && hello.payload[0] == world_size_;
    if (hello.opcode != Opcode::barrier || hello.sequence != 0 || !world_ok || peer <= 0 ||
        peer >= world_size_ || peer_fds_[static_cast<std::size_t>(peer)] >= 0) {
      ::close(fd);
      throw TransportError("rejected handshake from configured rank " + std::to_string(peer));
    }
    peer_fds_[static_cast<std::size_t>(peer)] = fd;
    write_frame(fd, WireMessage{Opcode::barrier, 0, 0, {static_cast<double>(world_size_)}}, rank_name(peer));
  }
  ::close(listen_fd_);
  listen_fd_ = -1;
}

void SocketTransport::connect_root(std::uint16_t port, Clock::time_point deadline) {
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket: " + errno_text());
    sockaddr_in addr = loopback(port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      set_nodelay(fd);
      peer_fds_[0] = fd;
      break;
    }
    const int err = errno;
    ::close(fd);
    if (err != ECONNREFUSED && err != EINTR && err != EAGAIN) {
      throw TransportError("connect to 127.0.0.1:" + std::to_string(port) + ": " + std::strerror(err));
    }
    if (Clock::now() >= deadline) throw TransportError("rank handshake timed out: root not reachable");
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  write_frame(peer_fds_[0],
              WireMessage{Opcode::barrier, static_cast<std::uint32_t>(rank_), 0, {static_cast<double>(world_size_)}},
              rank_name(0));
  const WireMessage ack = read_frame(peer_fds_[0], deadline, rank_name(0));
  if (ack.opcode != Opcode::barrier || ack.rank != 0 || ack.payload.size() != 1 ||
      ack.payload[0] != world_size_) {
    throw TransportError("malformed handshake acknowledgement from rank 0");
  }
}

int SocketTransport::fd_for(int peer) const {
  if (peer < 0 || peer >= world_size_) throw ContractError("peer rank out of range");
  const int fd = peer_fds_[static_cast<std::size_t>(peer)];
  if (fd < 0) throw TransportError("no connection to " + rank_name(peer));
  return fd;
}

void SocketTransport::send(int peer, const WireMessage& message) {
  write_frame(fd_for(peer), message, rank_name(peer));
}

WireMessage SocketTransport::receive(int peer, std::chrono::milliseconds timeout) {
  return read_frame(fd_for(peer), Clock::now() + timeout, rank_name(peer));
}

void SocketTransport::abort() noexcept {
  for (int fd : peer_fds_) {
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

}  // namespace sampar
