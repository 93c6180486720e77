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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sampar/wire.hpp"

namespace sampar {

enum class TransportKind { in_process, socket };

std::string to_string(TransportKind kind);
TransportKind parse_transport_kind(const std::string& text);

// Point-to-point message channel between the ranks of one group. The
// collectives only ever talk between rank 0 and the other ranks.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual int rank() const = 0;
  virtual int world_size() const = 0;
  virtual void send(int peer, const WireMessage& message) = 0;
  // Blocks until a message from `peer` arrives. Throws TransportError on
  // timeout, disconnect or abort.
  virtual WireMessage receive(int peer, std::chrono::milliseconds timeout) = 0;
  // Fail-fast: unblocks every rank waiting on this group.
  virtual void abort() noexcept = 0;
};

// Shared mailboxes for ranks running as threads of one process.
class InProcessFabric : public std::enable_shared_from_this<InProcessFabric> {
 public:
  static std::shared_ptr<InProcessFabric> create(int world_size);

  int world_size() const { return world_size_; }
  std::unique_ptr<Transport> endpoint(int rank);
  void abort() noexcept;
  bool aborted() const { return aborted_.load(); }

  void post(int from, int to, WireMessage message);
  WireMessage take(int from, int to, std::chrono::milliseconds timeout);

 private:
  explicit InProcessFabric(int world_size);

  struct Mailbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<WireMessage> queue;
  };
  Mailbox& box(int from, int to) { return *boxes_[static_cast<std::size_t>(to * world_size_ + from)]; }

  int world_size_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::atomic<bool> aborted_{false};
};

// Loopback TCP star: rank 0 listens on 127.0.0.1:port, every other rank
// connects and announces its configured rank in a handshake frame.
class SocketTransport : public Transport {
 public:
  SocketTransport(int rank, int world_size, std::uint16_t port, std::chrono::milliseconds timeout);
  ~SocketTransport() override;

  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  int rank() const override { return rank_; }
  int world_size() const override { return world_size_; }
  void send(int peer, const WireMessage& message) override;
  WireMessage receive(int peer, std::chrono::milliseconds timeout) override;
  void abort() noexcept override;

 private:
  void accept_peers(std::uint16_t port, std::chrono::steady_clock::time_point deadline);
  void connect_root(std::uint16_t port, std::chrono::steady_clock::time_point deadline);
  int fd_for(int peer) const;

  int rank_;
  int world_size_;
  int listen_fd_ = -1;
  std::vector<int> peer_fds_;
};

// Asks the kernel for an unused loopback port.
std::uint16_t pick_free_port();

}  // namespace sampar
