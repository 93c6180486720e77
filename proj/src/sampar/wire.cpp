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

#include "sampar/wire.hpp"

#include <bit>
#include <cstring>

#include "sampar/errors.hpp"

namespace sampar {

std::string to_string(Opcode op) {
  switch (op) {
    case Opcode::allreduce: return "allreduce";
    case Opcode::broadcast: return "broadcast";
    case Opcode::barrier: return "barrier";
    case Opcode::allgather_stats: return "allgather_stats";
  }
  return "opcode(" + std::to_string(static_cast<int>(op)) + ")";
}

std::vector<std::byte> encode(const WireMessage& message) {
  std::vector<std::byte> out;
  out.reserve(kWireHeaderSize + 8 * message.payload.size());
  for (char c : kWireMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(std::byte{kWireVersion});
  out.push_back(static_cast<std::byte>(message.opcode));
  write_le(out, message.rank);
  write_le(out, message.sequence);
  write_le(out, static_cast<std::uint64_t>(8 * message.payload.size()));
  if constexpr (std::endian::native == std::endian::little) {
    const std::size_t offset = out.size();
    out.resize(offset + 8 * message.payload.size());
    std::memcpy(out.data() + offset, message.payload.data(), 8 * message.payload.size());
  } else {
    for (double v : message.payload) write_le(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

WireHeader decode_header(std::span<const std::byte> header) {
  if (header.size() < kWireHeaderSize) throw TransportError("short wire header");
  if (std::memcmp(header.data(), kWireMagic, 4) != 0) throw TransportError("bad wire magic");
  const auto version = std::to_integer<std::uint8_t>(header[4]);
  if (version != kWireVersion) {
    throw TransportError("unsupported wire version " + std::to_string(version));
  }
  const auto op = std::to_integer<std::uint8_t>(header[5]);
  if (op < 1 || op > 4) throw TransportError("unknown opcode " + std::to_string(op));
  WireHeader h{static_cast<Opcode>(op), read_le<std::uint32_t>(header.subspan(6)),
               read_le<std::uint32_t>(header.subspan(10)), read_le<std::uint64_t>(header.subspan(14))};
  if (h.payload_len % 8 != 0) {
    throw TransportError("payload length " + std::to_string(h.payload_len) + " is not a multiple of 8");
  }
  return h;
}

void decode_payload(std::span<const std::byte> bytes, std::span<double> out) {
  if (bytes.size() != 8 * out.size()) throw TransportError("payload size mismatch");
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), bytes.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::bit_cast<double>(read_le<std::uint64_t>(bytes.subspan(8 * i)));
    }
  }
}

WireMessage decode(std::span<const std::byte> frame) {
  const WireHeader h = decode_header(frame);
  if (frame.size() != kWireHeaderSize + h.payload_len) {
    throw TransportError("frame length does not match payload_len");
  }
  WireMessage m{h.opcode, h.rank, h.sequence, std::vector<double>(h.payload_len / 8)};
  decode_payload(frame.subspan(kWireHeaderSize), m.payload);
  return m;
}

}  // namespace sampar
