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

#include "sampar/process_group.hpp"

#include <algorithm>

#include "sampar/errors.hpp"

namespace sampar {

ProcessGroup::ProcessGroup(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {
  if (transport_) {
    rank_ = transport_->rank();
    world_size_ = transport_->world_size();
  }
}

ProcessGroup ProcessGroup::single() { return ProcessGroup(nullptr); }

void ProcessGroup::abort() noexcept {
  if (transport_) transport_->abort();
}

std::uint32_t ProcessGroup::next_sequence() { return ++sequence_; }

template <class Fn>
auto ProcessGroup::guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (...) {
    abort();
    throw;
  }
}

void ProcessGroup::post(int peer, Opcode op, std::uint32_t seq, std::vector<double> payload) {
  transport_->send(peer, WireMessage{op, static_cast<std::uint32_t>(rank_), seq, std::move(payload)});
}

WireMessage ProcessGroup::expect(int peer, Opcode op, std::uint32_t seq) {
  WireMessage m = transport_->receive(peer, timeout_);
  if (m.opcode != op || m.sequence != seq || m.rank != static_cast<std::uint32_t>(peer)) {
    throw DesyncError("rank " + std::to_string(rank_) + " expected " + to_string(op) + " #" +
                      std::to_string(seq) + " from rank " + std::to_string(peer) + ", got " +
                      to_string(m.opcode) + " #" + std::to_string(m.sequence) + " from rank " +
                      std::to_string(m.rank));
  }
  return m;
}

std::vector<std::vector<double>> ProcessGroup::gather_at_root(Opcode op, std::uint32_t seq,
                                                               std::span<const double> buffer) {
  if (rank_ != 0) {
    post(0, op, seq, std::vector<double>(buffer.begin(), buffer.end()));
    return {};
  }
  std::vector<std::vector<double>> all(static_cast<std::size_t>(world_size_));
  all[0].assign(buffer.begin(), buffer.end());
  for (int r = 1; r < world_size_; ++r) all[static_cast<std::size_t>(r)] = expect(r, op, seq).payload;
  for (int r = 1; r < world_size_; ++r) {
    if (all[static_cast<std::size_t>(r)].size() != all[0].size()) {
      throw ProtocolError(to_string(op) + " length mismatch: rank 0 has " + std::to_string(all[0].size()) +
                          " values, rank " + std::to_string(r) + " has " +
                          std::to_string(all[static_cast<std::size_t>(r)].size()));
    }
  }
  return all;
}

std::vector<double> ProcessGroup::allreduce_average(std::span<const double> buffer) {
  const std::uint32_t seq = next_sequence();
  if (world_size_ == 1) return {buffer.begin(), buffer.end()};
  return guarded([&] {
    auto all = gather_at_root(Opcode::allreduce, seq, buffer);
    if (rank_ == 0) {
      std::vector<double> result = std::move(all[0]);
      for (std::size_t k = 1; k < all.size(); ++k) {
        const double count = static_cast<double>(k + 1);
        const auto& x = all[k];
        for (std::size_t i = 0; i < result.size(); ++i) result[i] += (x[i] - result[i]) / count;
      }
      for (int r = 1; r < world_size_; ++r) post(r, Opcode::allreduce, seq, result);
      return result;
    }
    WireMessage m = expect(0, Opcode::allreduce, seq);
    if (m.payload.size() != buffer.size()) {
      throw ProtocolError("allreduce result has " + std::to_string(m.payload.size()) + " values, rank " +
                          std::to_string(rank_) + " sent " + std::to_string(buffer.size()));
    }
    return std::move(m.payload);
  });
}

std::vector<double> ProcessGroup::broadcast(std::span<const double> buffer, int root) {
  if (root < 0 || root >= world_size_) {
    throw ContractError("broadcast root " + std::to_string(root) + " out of range for world size " +
                        std::to_string(world_size_));
  }
  const std::uint32_t seq = next_sequence();
  if (world_size_ == 1) return {buffer.begin(), buffer.end()};
  return guarded([&]() -> std::vector<double> {
    if (rank_ == root && root != 0) {
      post(0, Opcode::broadcast, seq, std::vector<double>(buffer.begin(), buffer.end()));
      return {buffer.begin(), buffer.end()};
    }
    if (rank_ == 0) {
      std::vector<double> value = root == 0 ? std::vector<double>(buffer.begin(), buffer.end())
                                            : expect(root, Opcode::broadcast, seq).payload;
      for (int r = 1; r < world_size_; ++r) {
        if (r != root) post(r, Opcode::broadcast, seq, value);
      }
      return value;
    }
    return expect(0, Opcode::broadcast, seq).payload;
  });
}

std::vector<std::vector<double>> ProcessGroup::allgather(std::span<const double> buffer) {
  const std::uint32_t seq = next_sequence();
  if (world_size_ == 1) return {std::vector<double>(buffer.begin(), buffer.end())};
  return guarded([&] {
    auto all = gather_at_root(Opcode::allgather_stats, seq, buffer);
    if (rank_ == 0) {
      std::vector<double> joined;
      joined.reserve(buffer.size() * all.size());
      for (const auto& part : all) joined.insert(joined.end(), part.begin(), part.end());
      for (int r = 1; r < world_size_; ++r) post(r, Opcode::allgather_stats, seq, joined);
      return all;
    }
    WireMessage m = expect(0, Opcode::allgather_stats, seq);
    const std::size_t n = buffer.size();
    if (m.payload.size() != n * static_cast<std::size_t>(world_size_)) {
      throw ProtocolError("allgather result has " + std::to_string(m.payload.size()) +
                          " values, expected " + std::to_string(n * static_cast<std::size_t>(world_size_)));
    }
    std::vector<std::vector<double>> parts(static_cast<std::size_t>(world_size_));
    for (std::size_t r = 0; r < parts.size(); ++r) {
      parts[r].assign(m.payload.begin() + static_cast<std::ptrdiff_t>(r * n),
                      m.payload.begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
    }
    return parts;
  });
}

std::vector<double> ProcessGroup::allreduce_max(std::span<const double> buffer) {
  auto all = allgather(buffer);
  std::vector<double> out = std::move(all[0]);
  for (std::size_t r = 1; r < all.size(); ++r) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], all[r][i]);
  }
  return out;
}

SampleStatistics ProcessGroup::allgather_statistics(const SampleStatistics& local) {
  const auto all = allgather(local.pack());
  SampleStatistics merged = SampleStatistics::unpack(all[0], local.mean.shape());
  for (std::size_t r = 1; r < all.size(); ++r) {
    merged = merge_statistics(merged, SampleStatistics::unpack(all[r], local.mean.shape()));
  }
  return merged;
}

void ProcessGroup::barrier() {
  const std::uint32_t seq = next_sequence();
  if (world_size_ == 1) return;
  guarded([&] {
    gather_at_root(Opcode::barrier, seq, {});
    if (rank_ == 0) {
      for (int r = 1; r < world_size_; ++r) post(r, Opcode::barrier, seq, {});
    } else {
      expect(0, Opcode::barrier, seq);
    }
  });
}

}  // namespace sampar
