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

#include <cstdint>
#include <random>
#include <span>

namespace sampar {

// Stream tags for derive_seed. Values are part of the seed recipe and are
// written into every run manifest; do not renumber.
enum class StreamTag : std::uint64_t {
  initialization = 1,
  weight_sample = 2,
  augmentation = 3,
  shuffle = 4,
  evaluation = 5,
  data = 6,
};

// Seed recipe constants (recorded in the manifest).
inline constexpr std::uint64_t kSeedGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kSeedMixA = 0xBF58476D1CE4E5B9ULL;
inline constexpr std::uint64_t kSeedMixB = 0x94D049BB133111EBULL;
inline constexpr int kSeedRecipeVersion = 1;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for one random stream. Chains mix64 over
//   base_seed, tag, epoch, batch, index
// where `index` is the GLOBAL sample index for weight-sampling streams and
// the worker rank (or item index) for augmentation streams. Weight samples are
// therefore identical no matter which worker evaluates them.
std::uint64_t derive_seed(std::uint64_t base_seed, StreamTag tag, std::uint64_t epoch,
                          std::uint64_t batch, std::uint64_t index);

// Source of the Gaussian noise and dropout masks consumed by one stochastic
// forward pass. A zero stream yields eps = 0 and all-keep masks.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}
  static NoiseStream zero();

  std::uint64_t seed() const { return seed_; }
  bool is_zero() const { return zero_; }

  void fill_normal(std::span<double> out);
  // Inverted-dropout mask: 0 with probability p, else 1/(1-p).
  void fill_keep_mask(std::span<double> out, double drop_probability);

 private:
  NoiseStream() : engine_(0), seed_(0), zero_(true) {}

  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool zero_ = false;
};

}  // namespace sampar
