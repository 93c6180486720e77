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
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sampar/dropout.hpp"
#include "sampar/random.hpp"
#include "sampar/tape.hpp"
#include "sampar/variational.hpp"

namespace sampar {

enum class Activation { relu, tanh };

// variational: every weight and bias is sampled from its Gaussian posterior.
// mc_dropout: weights are the means; stochasticity comes from dropout masks.
enum class InferenceMethod { variational, mc_dropout };

std::string to_string(Activation activation);
std::string to_string(InferenceMethod method);
Activation parse_activation(const std::string& text);
InferenceMethod parse_inference_method(const std::string& text);

struct ModelSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden = {128, 128};
  std::size_t output_dim = 1;
  Activation activation = Activation::relu;
  InferenceMethod method = InferenceMethod::variational;
  // sigma_init = sigma_scale / fan_in.
  double sigma_scale = 1.0;
  // Dropout after each hidden activation (mc_dropout only). Per-layer
  // probabilities override dropout_p; 0 omits the layer.
  double dropout_p = 0.1;
  std::vector<double> dropout_per_layer;

  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct VariationalLinear {
  VariationalParameter weight;  // [in x out]
  VariationalParameter bias;    // [out]

  std::size_t in() const { return weight.shape()[0]; }
  std::size_t out() const { return weight.shape()[1]; }
};

struct ActivationLayer {
  Activation kind = Activation::relu;
};

using Layer = std::variant<VariationalLinear, ActivationLayer, DropoutLayer>;

// Stack of layers forming an MLP; one replica per worker.
class BayesianModel {
 public:
  BayesianModel() = default;
  BayesianModel(const ModelSpec& spec, std::uint64_t seed);
  BayesianModel(InferenceMethod method, std::vector<Layer> layers);

  InferenceMethod method() const { return method_; }
  std::span<Layer> layers() { return layers_; }
  std::span<const Layer> layers() const { return layers_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;

  // One stochastic pass: fresh weights (variational) and masks (dropout) drawn
  // from `noise`. Returns [batch x output_dim].
  Var forward_sampled(Tape& tape, const Tensor& x, NoiseStream& noise);
  // Pass with weights fixed to their means and dropout disabled.
  Var forward_mean(Tape& tape, const Tensor& x);

  // Closed-form KL to the standard normal prior; constant 0 for mc_dropout.
  Var kl(Tape& tape);

  // Trainable tensors in a fixed order: per linear layer weight.mu, bias.mu,
  // then weight.rho, bias.rho (variational only).
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  // Stored values: sum over linear layers of 2 * (in * out + out).
  std::size_t parameter_count() const;
  std::size_t trainable_count() const;

  void zero_grad();
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);
  std::vector<double> flat_gradients() const;
  void set_flat_gradients(std::span<const double> values);

  void set_dropout_mode(DropoutMode mode);

 private:
  Var forward(Tape& tape, const Tensor& x, NoiseStream* noise);

  InferenceMethod method_ = InferenceMethod::variational;
  std::vector<Layer> layers_;
};

}  // namespace sampar
