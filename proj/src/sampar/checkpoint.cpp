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

#include "sampar/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sampar/errors.hpp"
#include "sampar/wire.hpp"

namespace sampar {
namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::span<const std::byte> take(std::size_t n) {
    if (bytes_.size() - offset_ < n) throw ParseError("checkpoint truncated at byte " + std::to_string(offset_));
    auto out = bytes_.subspan(offset_, n);
    offset_ += n;
    return out;
  }
  std::uint8_t u8() { return std::to_integer<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return read_le<std::uint32_t>(take(4)); }
  double f64() { return std::bit_cast<double>(read_le<std::uint64_t>(take(8))); }
  bool done() const { return offset_ == bytes_.size(); }

 private:
  std::span<const std::byte> bytes_;
  std::size_t offset_ = 0;
};

void put_u8(std::vector<std::byte>& out, std::uint8_t v) { out.push_back(std::byte{v}); }

void put_f64s(std::vector<std::byte>& out, std::span<const double> values) {
  for (double v : values) write_le(out, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

std::vector<std::byte> encode_checkpoint(const BayesianModel& model) {
  std::vector<std::byte> out;
  for (char c : kCheckpointMagic) out.push_back(static_cast<std::byte>(c));
  write_le(out, kCheckpointVersion);
  write_le(out, static_cast<std::uint32_t>(model.layers().size()));
  write_le(out, static_cast<std::uint32_t>(model.method() == InferenceMethod::variational ? 0 : 1));
  for (const Layer& layer : model.layers()) {
    if (const auto* linear = std::get_if<VariationalLinear>(&layer)) {
      put_u8(out, 1);
      write_le(out, static_cast<std::uint32_t>(linear->in()));
      write_le(out, static_cast<std::uint32_t>(linear->out()));
      put_f64s(out, linear->weight.mu.data());
      put_f64s(out, linear->bias.mu.data());
      put_f64s(out, linear->weight.rho.data());
      put_f64s(out, linear->bias.rho.data());
    } else if (const auto* act = std::get_if<ActivationLayer>(&layer)) {
      put_u8(out, 2);
      put_u8(out, act->kind == Activation::relu ? 0 : 1);
    } else if (const auto* drop = std::get_if<DropoutLayer>(&layer)) {
      put_u8(out, 3);
      write_le(out, std::bit_cast<std::uint64_t>(drop->drop_probability));
      put_u8(out, drop->mode == DropoutMode::deterministic ? 0 : 1);
    }
  }
  return out;
}

BayesianModel decode_checkpoint(std::span<const std::byte> bytes) {
  Reader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) throw ParseError("not a checkpoint (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  const std::uint32_t method = in.u32();
  if (method > 1) throw ParseError("unknown inference method " + std::to_string(method));

  auto read_array = [&in](Tensor& t) {
    for (double& v : t.data()) v = in.f64();
  };

  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t kind = in.u8();
    if (kind == 1) {
      const std::size_t rows = in.u32();
      const std::size_t cols = in.u32();
      VariationalLinear linear{{Tensor(Shape{rows, cols}), Tensor(Shape{rows, cols})},
                               {Tensor(Shape{cols}), Tensor(Shape{cols})}};
      read_array(linear.weight.mu);
      read_array(linear.bias.mu);
      read_array(linear.weight.rho);
      read_array(linear.bias.rho);
      layers.emplace_back(std::move(linear));
    } else if (kind == 2) {
      const std::uint8_t act = in.u8();
      if (act > 1) throw ParseError("unknown activation code " + std::to_string(act));
      layers.emplace_back(ActivationLayer{act == 0 ? Activation::relu : Activation::tanh});
    } else if (kind == 3) {
      const double p = in.f64();
      const std::uint8_t mode = in.u8();
      layers.emplace_back(DropoutLayer{p, mode == 0 ? DropoutMode::deterministic : DropoutMode::stochastic});
    } else {
      throw ParseError("unknown layer kind " + std::to_string(kind) + " at layer " + std::to_string(i));
    }
  }
  if (!in.done()) throw ParseError("trailing bytes after checkpoint");
  return BayesianModel(method == 0 ? InferenceMethod::variational : InferenceMethod::mc_dropout,
                       std::move(layers));
}

void save_checkpoint(const BayesianModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

BayesianModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return decode_checkpoint(bytes);
}

}  // namespace sampar
