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
#include <string>

#include "sampar/tensor.hpp"

namespace sampar {

enum class AugmentKind { none, additive_jitter, periodic_shift, horizontal_flip, random_crop };

std::string to_string(AugmentKind kind);
AugmentKind parse_augment_kind(const std::string& text);

// Label-preserving input augmentation. Only the inputs are touched.
struct Augmentation {
  AugmentKind kind = AugmentKind::none;
  double jitter_scale = 0.1;   // additive_jitter: x + scale * N(0, 1)
  std::size_t max_shift = 4;   // periodic_shift: roll by U{-max, ..., max}
  double flip_prob = 0.5;      // horizontal_flip
  std::size_t crop_pad = 1;    // random_crop: zero-pad then crop back, i.e. shift by U{-pad, ..., pad}^2
  // Inputs are side x side images when > 0, flat sequences otherwise.
  // Flip and crop need images; periodic_shift rolls image rows along the width.
  std::size_t image_side = 0;

  void validate(std::size_t input_width) const;
  bool operator==(const Augmentation&) const = default;
};

// Pure function of (inputs, aug, seed). Row i draws from a stream keyed by
// (seed, row_offset + i), so a shard of a batch augments exactly like the
// same rows inside the full batch.
Tensor augment(const Tensor& inputs, const Augmentation& aug, std::uint64_t seed, std::size_t row_offset = 0);

// Rolls every row (or every image row when image_side > 0) right by `shift`.
Tensor periodic_shift(const Tensor& inputs, long shift, std::size_t image_side = 0);

}  // namespace sampar
