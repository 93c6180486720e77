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

#include <algorithm>
#include <cctype>

#include "sampar/errors.hpp"
#include "sampar/transport.hpp"

namespace sampar {

std::string to_string(TransportKind kind) {
  return kind == TransportKind::in_process ? "inproc" : "socket";
}

TransportKind parse_transport_kind(const std::string& text) {
  if (text == "inproc" || text == "in_process") return TransportKind::in_process;
  if (text == "socket") return TransportKind::socket;
  throw ConfigError("unknown transport '" + text + "' (expected inproc|socket)");
}

namespace {

class InProcessEndpoint : public Transport {
 public:
  InProcessEndpoint(std::shared_ptr<InProcessFabric> fabric, int rank)
      : fabric_(std::move(fabric)), rank_(rank) {}

  int rank() const override { return rank_; }
  int world_size() const override { return fabric_->world_size(); }

  void send(int peer, const WireMessage& message) override {
    fabric_->post(rank_, peer, message);
  }

  WireMessage receive(int peer, std::chrono::milliseconds timeout) override {
    return fabric_->take(peer, rank_, timeout);
  }

  void abort() noexcept override { fabric_->abort(); }

 private:
  std::shared_ptr<InProcessFabric> fabric_;
  int rank_;
};

}  // namespace

InProcessFabric::InProcessFabric(int world_size) : world_size_(world_size) {
  boxes_.reserve(static_cast<std::size_t>(world_size * world_size));
  for (int i = 0; i < world_size * world_size; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

std::shared_ptr<InProcessFabric> InProcessFabric::create(int world_size) {
  if (world_size < 1) throw ContractError("world size must be >= 1");
  return std::shared_ptr<InProcessFabric>(new InProcessFabric(world_size));
}

std::unique_ptr<Transport> InProcessFabric::endpoint(int rank) {
  if (rank < 0 || rank >= world_size_) throw ContractError("rank out of range");
  return std::make_unique<InProcessEndpoint>(shared_from_this(), rank);
}

void InProcessFabric::abort() noexcept {
  aborted_.store(true);
  for (auto& b : boxes_) {
    std::lock_guard lock(b->mutex);
    b->ready.notify_all();
  }
}

void InProcessFabric::post(int from, int to, WireMessage message) {
  if (to < 0 || to >= world_size_) throw ContractError("destination rank out of range");
  if (aborted_.load()) throw AbortedError("group aborted after a peer failure");
  Mailbox& b = box(from, to);
  {
    std::lock_guard lock(b.mutex);
    b.queue.push_back(std::move(message));
  }
  b.ready.notify_one();
}

WireMessage InProcessFabric::take(int from, int to, std::chrono::milliseconds timeout) {
  if (from < 0 || from >= world_size_) throw ContractError("source rank out of range");
  Mailbox& b = box(from, to);
  std::unique_lock lock(b.mutex);
  const bool ready = b.ready.wait_for(lock, timeout, [&] { return !b.queue.empty() || aborted_.load(); });
  if (!b.queue.empty()) {
    WireMessage m = std::move(b.queue.front());
    b.queue.pop_front();
    return m;
  }
  if (aborted_.load()) throw AbortedError("group aborted after a peer failure");
  (void)ready;
  throw TransportError("timed out after " + std::to_string(timeout.count()) +
                       " ms waiting for rank " + std::to_string(from));
}

}  // namespace sampar
