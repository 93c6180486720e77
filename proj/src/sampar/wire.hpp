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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sampar {

template <class T>
void write_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <class T>
T read_le(std::span<const std::byte> in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
  }
  return static_cast<T>(v);
}

enum class Opcode : std::uint8_t {
  allreduce = 1,
  broadcast = 2,
  barrier = 3,
  allgather_stats = 4,
};

std::string to_string(Opcode op);

// Frame exchanged between ranks. Byte layout (little-endian):
//
//   offset  size  field
//        0     4  magic "BPAR"
//        4     1  version (= 1)
//        5     1  opcode
//        6     4  rank (sender)
//       10     4  sequence
//       14     8  payload_len in bytes (multiple of 8)
//       22     *  payload: f64 array
struct WireMessage {
  Opcode opcode = Opcode::barrier;
  std::uint32_t rank = 0;
  std::uint32_t sequence = 0;
  std::vector<double> payload;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

inline constexpr char kWireMagic[4] = {'B', 'P', 'A', 'R'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderSize = 22;

struct WireHeader {
  Opcode opcode;
  std::uint32_t rank;
  std::uint32_t sequence;
  std::uint64_t payload_len;
};

std::vector<std::byte> encode(const WireMessage& message);
// Validates magic, version, opcode and payload alignment; throws TransportError.
WireHeader decode_header(std::span<const std::byte> header);
WireMessage decode(std::span<const std::byte> frame);
// Little-endian f64 array to host doubles.
void decode_payload(std::span<const std::byte> bytes, std::span<double> out);

}  // namespace sampar
