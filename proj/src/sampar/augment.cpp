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

#include "sampar/augment.hpp"

#include <random>

#include "sampar/errors.hpp"
#include "sampar/random.hpp"

namespace sampar {

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::none: return "none";
    case AugmentKind::additive_jitter: return "additive_jitter";
    case AugmentKind::periodic_shift: return "periodic_shift";
    case AugmentKind::horizontal_flip: return "horizontal_flip";
    case AugmentKind::random_crop: return "random_crop";
  }
  return "?";
}

AugmentKind parse_augment_kind(const std::string& text) {
  for (AugmentKind k : {AugmentKind::none, AugmentKind::additive_jitter, AugmentKind::periodic_shift,
                        AugmentKind::horizontal_flip, AugmentKind::random_crop}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown augmentation '" + text + "'");
}

void Augmentation::validate(std::size_t input_width) const {
  if (!(jitter_scale >= 0.0)) throw ConfigError("augment.jitter_scale must be >= 0");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ConfigError("augment.flip_prob must lie in [0, 1]");
  const bool image = image_side > 0 && image_side * image_side == input_width;
  if (image_side > 0 && !image) {
    throw ConfigError("inputs of width " + std::to_string(input_width) + " are not " +
                      std::to_string(image_side) + "x" + std::to_string(image_side) + " images");
  }
  if ((kind == AugmentKind::horizontal_flip || kind == AugmentKind::random_crop) && !image) {
    throw ConfigError(to_string(kind) + " needs image-shaped inputs");
  }
}

namespace {

void roll(std::span<const double> src, std::span<double> dst, long shift) {
  const long n = static_cast<long>(src.size());
  for (long j = 0; j < n; ++j) dst[static_cast<std::size_t>(((j + shift) % n + n) % n)] = src[static_cast<std::size_t>(j)];
}

void roll_row(std::span<const double> src, std::span<double> dst, long shift, std::size_t side) {
  if (side == 0) {
    roll(src, dst, shift);
    return;
  }
  for (std::size_t r = 0; r < side; ++r) roll(src.subspan(r * side, side), dst.subspan(r * side, side), shift);
}

}  // namespace

Tensor periodic_shift(const Tensor& inputs, long shift, std::size_t image_side) {
  Tensor out(inputs.shape());
  const std::size_t w = inputs.cols();
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    roll_row(inputs.data().subspan(i * w, w), out.data().subspan(i * w, w), shift, image_side);
  }
  return out;
}

Tensor augment(const Tensor& inputs, const Augmentation& aug, std::uint64_t seed, std::size_t row_offset) {
  if (inputs.rank() != 2) throw DimensionError("augment expects [batch x features], got " + to_string(inputs.shape()));
  aug.validate(inputs.cols());
  if (aug.kind == AugmentKind::none) return inputs;

  const std::size_t w = inputs.cols();
  const std::size_t side = aug.image_side;
  Tensor out = inputs;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    std::mt19937_64 engine(derive_seed(seed, StreamTag::augmentation, 0, 0, row_offset + i));
    auto src = inputs.data().subspan(i * w, w);
    auto dst = out.data().subspan(i * w, w);
    switch (aug.kind) {
      case AugmentKind::none:
        break;
      case AugmentKind::additive_jitter: {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t j = 0; j < w; ++j) dst[j] = src[j] + aug.jitter_scale * normal(engine);
        break;
      }
      case AugmentKind::periodic_shift: {
        const long m = static_cast<long>(aug.max_shift);
        std::uniform_int_distribution<long> pick(-m, m);
        roll_row(src, dst, pick(engine), side);
        break;
      }
      case AugmentKind::horizontal_flip: {
        std::bernoulli_distribution flip(aug.flip_prob);
        if (!flip(engine)) break;
        for (std::size_t r = 0; r < side; ++r) {
          for (std::size_t c = 0; c < side; ++c) dst[r * side + c] = src[r * side + (side - 1 - c)];
        }
        break;
      }
      case AugmentKind::random_crop: {
        const long p = static_cast<long>(aug.crop_pad);
        std::uniform_int_distribution<long> pick(-p, p);
        const long dy = pick(engine);
        const long dx = pick(engine);
        const long s = static_cast<long>(side);
        for (long r = 0; r < s; ++r) {
          for (long c = 0; c < s; ++c) {
            const long sr = r - dy;
            const long sc = c - dx;
            const bool inside = sr >= 0 && sr < s && sc >= 0 && sc < s;
            dst[static_cast<std::size_t>(r * s + c)] = inside ? src[static_cast<std::size_t>(sr * s + sc)] : 0.0;
          }
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace sampar
