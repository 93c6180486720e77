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
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sampar/process_group.hpp"
#include "sampar/transport.hpp"

namespace sampar {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitNumeric = 4;

// ConfigError -> 2, TransportError (incl. desync/protocol) -> 3,
// NumericError -> 4, anything else -> 1.
int exit_code_for(const std::exception_ptr& error);

// Test hook: SIGKILL one socket worker `after` the launch.
struct KillInjection {
  int rank = 0;
  std::chrono::milliseconds after{0};
};

struct LaunchOptions {
  int world_size = 1;
  TransportKind transport = TransportKind::in_process;
  std::uint16_t port = 0;  // socket only; 0 picks a free loopback port
  std::chrono::milliseconds timeout = kDefaultCollectiveTimeout;
  std::optional<KillInjection> kill;
};

struct WorkerOutcome {
  int rank = 0;
  int exit_code = kExitOk;
  std::string message;
};

struct LaunchResult {
  // Exit code of the first worker to fail (the root cause), else 0.
  int exit_code = kExitOk;
  std::string first_error;
  int first_failed_rank = -1;
  std::vector<WorkerOutcome> workers;
};

using WorkerEntry = std::function<void(ProcessGroup&)>;

// Runs `entry` on P ranks and joins them.
//   P == 1: inline on the calling thread with ProcessGroup::single().
//   in_process: one thread per rank over an InProcessFabric.
//   socket: one forked process per rank over loopback TCP. Results must
//     leave a child through the filesystem; only exit codes come back.
// The first failure aborts the fabric so that every other rank fails fast.
LaunchResult launch_workers(const LaunchOptions& options, const WorkerEntry& entry);

}  // namespace sampar
