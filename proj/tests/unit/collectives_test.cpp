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

#include <chrono>
#include <random>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "sampar/errors.hpp"
#include "sampar/launcher.hpp"
#include "sampar/process_group.hpp"
#include "sampar/transport.hpp"
#include "sampar/wire.hpp"

using namespace sampar;
using namespace std::chrono_literals;

namespace {

// Runs fn on P threads, each with its own loopback socket endpoint.
void run_socket_threads(int p, const std::function<void(ProcessGroup&)>& fn, std::chrono::milliseconds timeout = 10s) {
  const std::uint16_t port = pick_free_port();
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) {
    threads.emplace_back([&, r] {
      try {
        ProcessGroup g(std::make_unique<SocketTransport>(r, p, port, timeout), timeout);
        fn(g);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LaunchResult run_threads(int p, const WorkerEntry& fn, std::chrono::milliseconds timeout = kDefaultCollectiveTimeout) {
  LaunchOptions options;
  options.world_size = p;
  options.timeout = timeout;
  return launch_workers(options, fn);
}

std::vector<std::vector<double>> random_buffers(int p, std::size_t n, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(p), std::vector<double>(n));
  for (auto& b : out) {
    for (double& v : b) v = u(engine);
  }
  return out;
}

}  // namespace

TEST_CASE("wire format golden bytes") {
  const WireMessage m{Opcode::allreduce, 1, 2, {1.0}};
  const std::vector<std::byte> bytes = encode(m);
  const unsigned char expected[] = {'B',  'P',  'A',  'R',  0x01, 0x01, 0x01, 0x00, 0x00, 0x00,
                                    0x02, 0x00, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00,
                                    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F};
  REQUIRE(bytes.size() == sizeof expected);
  for (std::size_t i = 0; i < sizeof expected; ++i) CHECK(std::to_integer<unsigned>(bytes[i]) == expected[i]);
  CHECK(decode(bytes) == m);

  std::vector<std::byte> bad = bytes;
  bad[0] = std::byte{'X'};
  CHECK_THROWS_AS(decode(bad), TransportError);
  bad = bytes;
  bad[5] = std::byte{9};
  CHECK_THROWS_AS(decode(bad), TransportError);
  bad = bytes;
  bad[14] = std::byte{7};  // payload_len not a multiple of 8
  CHECK_THROWS_AS(decode(bad), TransportError);
}

TEST_CASE("allreduce_average examples") {
  std::vector<std::vector<double>> got(2);
  REQUIRE(run_threads(2, [&](ProcessGroup& g) {
            const std::vector<double> in = g.rank() == 0 ? std::vector<double>{1, 2} : std::vector<double>{3, 4};
            got[static_cast<std::size_t>(g.rank())] = g.allreduce_average(in);
          }).exit_code == 0);
  CHECK(got[0] == std::vector<double>{2, 3});
  CHECK(got[1] == std::vector<double>{2, 3});

  const std::vector<double> same = {0.1, 1.0 / 3.0, -7e-300, 1e300};
  std::vector<std::vector<double>> out(5);
  REQUIRE(run_threads(5, [&](ProcessGroup& g) { out[static_cast<std::size_t>(g.rank())] = g.allreduce_average(same); })
              .exit_code == 0);
  for (const auto& o : out) CHECK(o == same);
}

TEST_CASE("allreduce_average equals the rank-order fold bit for bit") {
  std::mt19937_64 engine(1);
  for (int p : {2, 3, 4, 7}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto inputs = random_buffers(p, 33, engine);
      const std::vector<double> expected = oracle::rank_order_mean(inputs);
      std::vector<std::vector<double>> got(static_cast<std::size_t>(p));
      REQUIRE(run_threads(p, [&](ProcessGroup& g) {
                got[static_cast<std::size_t>(g.rank())] = g.allreduce_average(inputs[static_cast<std::size_t>(g.rank())]);
              }).exit_code == 0);
      for (const auto& v : got) CHECK(v == expected);
    }
  }
}

TEST_CASE("broadcast") {
  ProcessGroup single = ProcessGroup::single();
  CHECK(single.broadcast(std::vector<double>{4.0}, 0) == std::vector<double>{4.0});
  for (int root : {0, 2}) {
    std::vector<std::vector<double>> got(3), averaged(3);
    REQUIRE(run_threads(3, [&](ProcessGroup& g) {
              const std::vector<double> mine = {g.rank() == root ? 7.0 : -1.0, 0.1 * g.rank()};
              const auto b = g.broadcast(mine, root);
              got[static_cast<std::size_t>(g.rank())] = b;
              averaged[static_cast<std::size_t>(g.rank())] = g.allreduce_average(b);
            }).exit_code == 0);
    for (int r = 0; r < 3; ++r) {
      CHECK(got[static_cast<std::size_t>(r)] == std::vector<double>{7.0, 0.1 * root});
      CHECK(averaged[static_cast<std::size_t>(r)] == got[static_cast<std::size_t>(r)]);
    }
  }
  CHECK_THROWS_AS(single.broadcast(std::vector<double>{1.0}, 1), ContractError);
}

TEST_CASE("allgather_statistics") {
  auto stats = [](std::initializer_list<double> v) {
    std::vector<Tensor> t;
    for (double x : v) t.push_back(Tensor::vector({x}));
    return SampleStatistics::from_samples(t);
  };
  ProcessGroup single = ProcessGroup::single();
  const SampleStatistics one = single.allgather_statistics(stats({1.0, 5.0}));
  CHECK(one.mean[0] == 3.0);
  CHECK(one.count == 2);

  std::vector<SampleStatistics> got(2);
  REQUIRE(run_threads(2, [&](ProcessGroup& g) {
            got[static_cast<std::size_t>(g.rank())] =
                g.allgather_statistics(g.rank() == 0 ? stats({0.0, 2.0}) : stats({4.0, 6.0}));
          }).exit_code == 0);
  for (const auto& s : got) {
    CHECK(s.mean[0] == 3.0);
    CHECK(s.variance()[0] == 5.0);
    CHECK(s.count == 4);
  }

  std::vector<std::size_t> counts(4);
  REQUIRE(run_threads(4, [&](ProcessGroup& g) {
            counts[static_cast<std::size_t>(g.rank())] = g.allgather_statistics(stats({1.0 * g.rank(), 2.0})).count;
          }).exit_code == 0);
  for (std::size_t c : counts) CHECK(c == 8);
}

TEST_CASE("barrier") {
  ProcessGroup single = ProcessGroup::single();
  single.barrier();

  double waited_ms = 0.0;
  REQUIRE(run_threads(2, [&](ProcessGroup& g) {
            if (g.rank() == 1) std::this_thread::sleep_for(50ms);
            const auto start = std::chrono::steady_clock::now();
            g.barrier();
            if (g.rank() == 0) {
              waited_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            }
          }).exit_code == 0);
  CHECK(waited_ms >= 50.0);

  std::vector<std::uint32_t> seq(3);
  REQUIRE(run_threads(3, [&](ProcessGroup& g) {
            for (int i = 0; i < 1000; ++i) g.barrier();
            seq[static_cast<std::size_t>(g.rank())] = g.sequence();
          }).exit_code == 0);
  for (auto s : seq) CHECK(s == 1000);
}

TEST_CASE("length mismatch is a protocol error naming ranks and lengths") {
  const LaunchResult r = run_threads(3, [&](ProcessGroup& g) {
    g.allreduce_average(std::vector<double>(g.rank() == 2 ? 5 : 4, 1.0));
  });
  CHECK(r.exit_code == kExitTransport);
  CHECK(r.first_error.find("rank 2") != std::string::npos);
  INFO(r.first_error);
  CHECK(r.first_error.find("5") != std::string::npos);
  CHECK(r.first_error.find("4") != std::string::npos);
}

TEST_CASE("collective mismatch is a desync error") {
  const LaunchResult r = run_threads(2, [&](ProcessGroup& g) {
    if (g.rank() == 0) {
      g.barrier();
    } else {
      g.allreduce_average(std::vector<double>{1.0});
    }
  });
  CHECK(r.exit_code == kExitTransport);
  INFO(r.first_error);
  CHECK(r.first_error.find("expected") != std::string::npos);
}

TEST_CASE("a failing rank aborts the others quickly") {
  const auto start = std::chrono::steady_clock::now();
  const LaunchResult r = run_threads(4, [&](ProcessGroup& g) {
    if (g.rank() == 3) throw NumericError("boom");
    g.barrier();
  });
  CHECK(r.exit_code == kExitNumeric);
  CHECK(r.first_failed_rank == 3);
  CHECK(std::chrono::steady_clock::now() - start < 5s);
}

TEST_CASE("a silent peer times out") {
  const LaunchResult r = run_threads(
      2,
      [&](ProcessGroup& g) {
        if (g.rank() == 0) g.barrier();
      },
      200ms);
  CHECK(r.exit_code == kExitTransport);
}

TEST_CASE("socket transport matches the in-process transport bit for bit") {
  std::mt19937_64 engine(44);
  const int p = 3;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inputs = random_buffers(p, 65, engine);
    std::vector<std::vector<double>> inproc(p), socket(p), gathered(p);
    REQUIRE(run_threads(p, [&](ProcessGroup& g) {
              inproc[static_cast<std::size_t>(g.rank())] = g.allreduce_average(inputs[static_cast<std::size_t>(g.rank())]);
            }).exit_code == 0);
    run_socket_threads(p, [&](ProcessGroup& g) {
      socket[static_cast<std::size_t>(g.rank())] = g.allreduce_average(inputs[static_cast<std::size_t>(g.rank())]);
      gathered[static_cast<std::size_t>(g.rank())] = g.broadcast(inputs[2], 2);
      g.barrier();
    });
    CHECK(inproc == socket);
    for (const auto& b : gathered) CHECK(b == inputs[2]);
  }
}

TEST_CASE("socket peer disconnect raises a transport error") {
  CHECK_THROWS_AS(run_socket_threads(2,
                                     [&](ProcessGroup& g) {
                                       if (g.rank() == 1) return;  // leaves without taking part
                                       g.barrier();
                                     }),
                  TransportError);
}

TEST_CASE("P = 1 launches inline") {
  const auto caller = std::this_thread::get_id();
  std::thread::id worker;
  LaunchOptions options;
  const LaunchResult r = launch_workers(options, [&](ProcessGroup& g) {
    worker = std::this_thread::get_id();
    CHECK(g.world_size() == 1);
  });
  CHECK(r.exit_code == 0);
  CHECK(worker == caller);
}
