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
#include <filesystem>
#include <span>
#include <vector>

#include "sampar/model.hpp"

namespace sampar {

// Binary model checkpoint, all integers and floats little-endian:
//
//   header   "BPCK" magic (4 bytes)
//            u32 version (= 1)
//            u32 layer count
//            u32 inference method (0 variational, 1 mc_dropout)
//   layers   u8 kind, then
//            kind 1 (linear):     u32 in, u32 out,
//                                 f64 mu[in*out + out]   (weight row-major, then bias)
//                                 f64 rho[in*out + out]
//            kind 2 (activation): u8 activation (0 relu, 1 tanh)
//            kind 3 (dropout):    f64 drop probability, u8 mode (0 deterministic, 1 stochastic)
inline constexpr char kCheckpointMagic[4] = {'B', 'P', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::byte> encode_checkpoint(const BayesianModel& model);
BayesianModel decode_checkpoint(std::span<const std::byte> bytes);

void save_checkpoint(const BayesianModel& model, const std::filesystem::path& path);
BayesianModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sampar
