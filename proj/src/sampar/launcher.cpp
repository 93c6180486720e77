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

#include "sampar/launcher.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <mutex>
#include <thread>

#include "sampar/errors.hpp"

namespace sampar {

int exit_code_for(const std::exception_ptr& error) {
  if (!error) return kExitOk;
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const TransportError&) {
    return kExitTransport;
  } catch (const NumericError&) {
    return kExitNumeric;
  } catch (...) {
    return kExitFailure;
  }
}

namespace {

std::string describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

// Records the first failure; later ones are usually fallout of the abort.
// A failing collective aborts the fabric before its rank gets here, so an
// abort notice may arrive first and is replaced by the real cause.
class FailureLog {
 public:
  void record(int rank, int code, const std::string& message, bool fallout, LaunchResult& result) {
    std::lock_guard lock(mutex_);
    if (result.first_failed_rank >= 0 && (fallout || !recorded_fallout_)) return;
    recorded_fallout_ = fallout;
    result.first_failed_rank = rank;
    result.exit_code = code;
    result.first_error = "rank " + std::to_string(rank) + ": " + message;
  }

 private:
  std::mutex mutex_;
  bool recorded_fallout_ = false;
};

bool is_abort_fallout(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const AbortedError&) {
    return true;
  } catch (...) {
    return false;
  }
}

LaunchResult run_inline(const WorkerEntry& entry) {
  LaunchResult result;
  result.workers.push_back({0, kExitOk, {}});
  try {
    ProcessGroup group = ProcessGroup::single();
    entry(group);
  } catch (...) {
    const auto error = std::current_exception();
    result.workers[0] = {0, exit_code_for(error), describe(error)};
    result.exit_code = result.workers[0].exit_code;
    result.first_error = "rank 0: " + result.workers[0].message;
    result.first_failed_rank = 0;
  }
  return result;
}

LaunchResult run_threads(const LaunchOptions& options, const WorkerEntry& entry) {
  const int p = options.world_size;
  auto fabric = InProcessFabric::create(p);
  LaunchResult result;
  result.workers.resize(static_cast<std::size_t>(p));
  FailureLog failures;

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) {
    threads.emplace_back([&, r] {
      WorkerOutcome& outcome = result.workers[static_cast<std::size_t>(r)];
      outcome.rank = r;
      try {
        ProcessGroup group(fabric->endpoint(r), options.timeout);
        entry(group);
      } catch (...) {
        const auto error = std::current_exception();
        outcome.exit_code = exit_code_for(error);
        outcome.message = describe(error);
        failures.record(r, outcome.exit_code, outcome.message, is_abort_fallout(error), result);
        fabric->abort();
      }
    });
  }
  for (auto& t : threads) t.join();
  return result;
}

// The child reports its error text through `report_fd`; only the exit code
// travels through waitpid.
[[noreturn]] void child_main(int rank, const LaunchOptions& options, std::uint16_t port, const WorkerEntry& entry,
                             int report_fd) {
  int code = kExitOk;
  try {
    ProcessGroup group(std::make_unique<SocketTransport>(rank, options.world_size, port, options.timeout),
                       options.timeout);
    entry(group);
  } catch (...) {
    const auto error = std::current_exception();
    code = exit_code_for(error);
    const std::string text = describe(error);
    for (std::size_t done = 0; done < text.size();) {
      const ssize_t n = ::write(report_fd, text.data() + done, text.size() - done);
      if (n <= 0) break;
      done += static_cast<std::size_t>(n);
    }
  }
  ::close(report_fd);
  std::fflush(nullptr);
  std::_Exit(code);
}

LaunchResult run_processes(const LaunchOptions& options, const WorkerEntry& entry) {
  const int p = options.world_size;
  const std::uint16_t port = options.port != 0 ? options.port : pick_free_port();
  LaunchResult result;
  result.workers.resize(static_cast<std::size_t>(p));

  std::fflush(nullptr);
  std::vector<pid_t> pids(static_cast<std::size_t>(p), -1);
  std::vector<int> reports(static_cast<std::size_t>(p), -1);
  for (int r = 0; r < p; ++r) {
    int fds[2] = {-1, -1};
    const pid_t pid = ::pipe(fds) == 0 ? ::fork() : -1;
    if (pid < 0) {
      for (int fd : fds) {
        if (fd >= 0) ::close(fd);
      }
      for (pid_t started : pids) {
        if (started > 0) ::kill(started, SIGKILL);
      }
      for (pid_t started : pids) {
        if (started > 0) ::waitpid(started, nullptr, 0);
      }
      throw TransportError("failed to spawn worker " + std::to_string(r));
    }
    if (pid == 0) {
      ::close(fds[0]);
      child_main(r, options, port, entry, fds[1]);
    }
    ::close(fds[1]);
    pids[static_cast<std::size_t>(r)] = pid;
    reports[static_cast<std::size_t>(r)] = fds[0];
  }

  std::thread killer;
  if (options.kill) {
    const KillInjection kill = *options.kill;
    if (kill.rank < 0 || kill.rank >= p) throw ContractError("kill injection rank out of range");
    const pid_t victim = pids[static_cast<std::size_t>(kill.rank)];
    killer = std::thread([victim, kill] {
      std::this_thread::sleep_for(kill.after);
      ::kill(victim, SIGKILL);
    });
  }

  std::vector<int> reap_order;
  for (int remaining = p; remaining > 0; --remaining) {
    int status = 0;
    const pid_t pid = ::waitpid(-1, &status, 0);
    if (pid < 0) break;
    int rank = 0;
    while (rank < p && pids[static_cast<std::size_t>(rank)] != pid) ++rank;
    if (rank == p) {
      ++remaining;
      continue;
    }
    WorkerOutcome& outcome = result.workers[static_cast<std::size_t>(rank)];
    outcome.rank = rank;
    std::string text;
    char chunk[512];
    const int fd = reports[static_cast<std::size_t>(rank)];
    for (ssize_t n; (n = ::read(fd, chunk, sizeof chunk)) > 0;) text.append(chunk, static_cast<std::size_t>(n));
    ::close(fd);
    if (WIFEXITED(status)) {
      outcome.exit_code = WEXITSTATUS(status);
      if (outcome.exit_code != kExitOk) {
        outcome.message = text.empty() ? "exited with code " + std::to_string(outcome.exit_code) : text;
      }
    } else if (WIFSIGNALED(status)) {
      // A vanished worker is a transport failure from the group's point of view.
      outcome.exit_code = kExitTransport;
      outcome.message = "killed by signal " + std::to_string(WTERMSIG(status));
    }
    reap_order.push_back(rank);
  }
  if (killer.joinable()) killer.join();

  // Root cause: a worker that died from a signal, else the first to exit
  // with an error. Survivors of a lost peer only report the fallout.
  FailureLog failures;
  for (int rank : reap_order) {
    const WorkerOutcome& o = result.workers[static_cast<std::size_t>(rank)];
    if (o.message.rfind("killed by signal", 0) == 0) failures.record(rank, o.exit_code, o.message, false, result);
  }
  for (int rank : reap_order) {
    const WorkerOutcome& o = result.workers[static_cast<std::size_t>(rank)];
    if (o.exit_code != kExitOk) failures.record(rank, o.exit_code, o.message, false, result);
  }
  return result;
}

}  // namespace

LaunchResult launch_workers(const LaunchOptions& options, const WorkerEntry& entry) {
  if (options.world_size < 1) throw ConfigError("world size must be >= 1");
  if (options.world_size == 1 && !options.kill) return run_inline(entry);
  if (options.transport == TransportKind::in_process) return run_threads(options, entry);
  return run_processes(options, entry);
}

}  // namespace sampar
