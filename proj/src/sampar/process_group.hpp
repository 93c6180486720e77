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

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sampar/statistics.hpp"
#include "sampar/transport.hpp"

namespace sampar {

inline constexpr std::chrono::milliseconds kDefaultCollectiveTimeout{30000};

// One worker's handle on a group of P ranks.
//
// Every collective is a star through rank 0: non-root ranks send their
// contribution to rank 0, which combines them in rank order 0, 1, ..., P-1
// and sends the result back. Each call carries a sequence number that all
// ranks must agree on. Any failure aborts the underlying transport so that
// every surviving rank raises instead of hanging.
class ProcessGroup {
 public:
  explicit ProcessGroup(std::unique_ptr<Transport> transport,
                        std::chrono::milliseconds timeout = kDefaultCollectiveTimeout);
  // Group of one; every collective is the identity.
  static ProcessGroup single();

  ProcessGroup(ProcessGroup&&) noexcept = default;
  ProcessGroup& operator=(ProcessGroup&&) noexcept = default;

  int rank() const { return rank_; }
  int world_size() const { return world_size_; }
  std::uint32_t sequence() const { return sequence_; }

  // Elementwise arithmetic mean, folded as a running mean in rank order:
  //   m_1 = x_0,  m_{k+1} = m_k + (x_k - m_k) / (k + 1).
  // The result is the same on every rank and identical inputs come back
  // bit-exact.
  std::vector<double> allreduce_average(std::span<const double> buffer);
  // Elementwise maximum (used to report the slowest worker's timings).
  std::vector<double> allreduce_max(std::span<const double> buffer);
  std::vector<double> broadcast(std::span<const double> buffer, int root);
  // Every rank's buffer, indexed by rank. Buffers must have equal length.
  std::vector<std::vector<double>> allgather(std::span<const double> buffer);
  // merge_statistics folded over ranks in rank order.
  SampleStatistics allgather_statistics(const SampleStatistics& local);
  void barrier();

  void abort() noexcept;

 private:
  std::uint32_t next_sequence();
  WireMessage expect(int peer, Opcode op, std::uint32_t seq);
  void post(int peer, Opcode op, std::uint32_t seq, std::vector<double> payload);
  // Star gather/scatter shared by the combining collectives.
  std::vector<std::vector<double>> gather_at_root(Opcode op, std::uint32_t seq, std::span<const double> buffer);
  template <class Fn>
  auto guarded(Fn&& fn) -> decltype(fn());

  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  int rank_ = 0;
  int world_size_ = 1;
  std::uint32_t sequence_ = 0;
};

}  // namespace sampar
