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

#include "sampar/model.hpp"

#include <algorithm>

#include "sampar/errors.hpp"
#include "sampar/ops.hpp"

namespace sampar {

std::string to_string(Activation activation) { return activation == Activation::relu ? "relu" : "tanh"; }

std::string to_string(InferenceMethod method) {
  return method == InferenceMethod::variational ? "variational" : "mc_dropout";
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + text + "' (expected relu|tanh)");
}

InferenceMethod parse_inference_method(const std::string& text) {
  if (text == "variational") return InferenceMethod::variational;
  if (text == "mc_dropout") return InferenceMethod::mc_dropout;
  throw ConfigError("unknown inference method '" + text + "' (expected variational|mc_dropout)");
}

void ModelSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("model input/output width must be >= 1");
  for (std::size_t w : hidden) {
    if (w == 0) throw ConfigError("hidden layer width must be >= 1");
  }
  if (!(sigma_scale > 0.0)) throw ConfigError("model.sigma_scale must be positive");
  if (!dropout_per_layer.empty() && dropout_per_layer.size() != hidden.size()) {
    throw ConfigError("model.dropout_per_layer needs one entry per hidden layer");
  }
  DropoutLayer{dropout_p, DropoutMode::stochastic}.validate();
  for (double p : dropout_per_layer) DropoutLayer{p, DropoutMode::stochastic}.validate();
}

BayesianModel::BayesianModel(const ModelSpec& spec, std::uint64_t seed) : method_(spec.method) {
  spec.validate();
  std::vector<std::size_t> widths;
  widths.push_back(spec.input_dim);
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(spec.output_dim);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    VariationalLinear linear{
        init_variational(Shape{in, out}, in, derive_seed(seed, StreamTag::initialization, l, 0, 0),
                         spec.sigma_scale),
        init_variational(Shape{out}, in, derive_seed(seed, StreamTag::initialization, l, 1, 0),
                         spec.sigma_scale)};
    layers_.emplace_back(std::move(linear));
    const bool hidden_layer = l + 2 < widths.size();
    if (!hidden_layer) continue;
    layers_.emplace_back(ActivationLayer{spec.activation});
    if (spec.method == InferenceMethod::mc_dropout) {
      const double p = spec.dropout_per_layer.empty() ? spec.dropout_p : spec.dropout_per_layer[l];
      if (p > 0.0) layers_.emplace_back(DropoutLayer{p, DropoutMode::stochastic});
    }
  }
}

BayesianModel::BayesianModel(InferenceMethod method, std::vector<Layer> layers)
    : method_(method), layers_(std::move(layers)) {
  std::size_t width = 0;
  for (const Layer& layer : layers_) {
    if (const auto* linear = std::get_if<VariationalLinear>(&layer)) {
      if (linear->weight.rho.shape() != linear->weight.mu.shape() ||
          linear->bias.mu.shape() != Shape{linear->out()} ||
          linear->bias.rho.shape() != linear->bias.mu.shape()) {
        throw DimensionError("inconsistent variational layer shapes");
      }
      if (width != 0 && linear->in() != width) {
        throw DimensionError("layer input width " + std::to_string(linear->in()) +
                             " does not match previous output width " + std::to_string(width));
      }
      width = linear->out();
    } else if (const auto* drop = std::get_if<DropoutLayer>(&layer)) {
      drop->validate();
    }
  }
  if (width == 0) throw ContractError("model needs at least one linear layer");
}

std::size_t BayesianModel::input_dim() const {
  for (const Layer& layer : layers_) {
    if (const auto* linear = std::get_if<VariationalLinear>(&layer)) return linear->in();
  }
  return 0;
}

std::size_t BayesianModel::output_dim() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (const auto* linear = std::get_if<VariationalLinear>(&*it)) return linear->out();
  }
  return 0;
}

Var BayesianModel::forward(Tape& tape, const Tensor& x, NoiseStream* noise) {
  if (x.rank() != 2 || x.shape()[1] != input_dim()) {
    throw DimensionError("model expects input [batch x " + std::to_string(input_dim()) + "], got " +
                         to_string(x.shape()));
  }
  Var h = tape.constant(x);
  for (Layer& layer : layers_) {
    if (auto* linear = std::get_if<VariationalLinear>(&layer)) {
      Var w;
      Var b;
      if (noise && method_ == InferenceMethod::variational) {
        w = sample_weights(tape, linear->weight, *noise);
        b = sample_weights(tape, linear->bias, *noise);
      } else {
        w = tape.parameter(linear->weight.mu);
        b = tape.parameter(linear->bias.mu);
      }
      h = add_bias(matmul(h, w), b);
    } else if (const auto* act = std::get_if<ActivationLayer>(&layer)) {
      h = act->kind == Activation::relu ? relu(h) : tanh(h);
    } else if (const auto* drop = std::get_if<DropoutLayer>(&layer)) {
      if (noise) h = dropout_forward(*drop, h, *noise);
    }
  }
  return h;
}

Var BayesianModel::forward_sampled(Tape& tape, const Tensor& x, NoiseStream& noise) {
  return forward(tape, x, &noise);
}

Var BayesianModel::forward_mean(Tape& tape, const Tensor& x) { return forward(tape, x, nullptr); }

Var BayesianModel::kl(Tape& tape) {
  if (method_ != InferenceMethod::variational) return tape.constant(Tensor::scalar(0.0));
  std::vector<Var> terms;
  for (Layer& layer : layers_) {
    if (auto* linear = std::get_if<VariationalLinear>(&layer)) {
      terms.push_back(kl_to_standard_normal(tape, linear->weight));
      terms.push_back(kl_to_standard_normal(tape, linear->bias));
    }
  }
  return add_n(terms);
}

std::vector<Tensor*> BayesianModel::parameters() {
  std::vector<Tensor*> out;
  for (Layer& layer : layers_) {
    if (auto* linear = std::get_if<VariationalLinear>(&layer)) {
      out.push_back(&linear->weight.mu);
      out.push_back(&linear->bias.mu);
      if (method_ == InferenceMethod::variational) {
        out.push_back(&linear->weight.rho);
        out.push_back(&linear->bias.rho);
      }
    }
  }
  return out;
}

std::vector<const Tensor*> BayesianModel::parameters() const {
  auto mutable_params = const_cast<BayesianModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::size_t BayesianModel::parameter_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers_) {
    if (const auto* linear = std::get_if<VariationalLinear>(&layer)) {
      count += 2 * (linear->in() * linear->out() + linear->out());
    }
  }
  return count;
}

std::size_t BayesianModel::trainable_count() const {
  std::size_t count = 0;
  for (const Tensor* t : parameters()) count += t->size();
  return count;
}

void BayesianModel::zero_grad() {
  for (Tensor* t : parameters()) t->zero_grad();
}

std::vector<double> BayesianModel::flat_parameters() const {
  std::vector<double> out;
  out.reserve(trainable_count());
  for (const Tensor* t : parameters()) out.insert(out.end(), t->data().begin(), t->data().end());
  return out;
}

void BayesianModel::set_flat_parameters(std::span<const double> values) {
  if (values.size() != trainable_count()) {
    throw DimensionError("flat parameter vector has " + std::to_string(values.size()) +
                         " entries, model has " + std::to_string(trainable_count()));
  }
  std::size_t offset = 0;
  for (Tensor* t : parameters()) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), t->size(), t->data().begin());
    offset += t->size();
  }
}

std::vector<double> BayesianModel::flat_gradients() const {
  std::vector<double> out;
  out.reserve(trainable_count());
  for (const Tensor* t : parameters()) {
    if (t->has_grad()) {
      out.insert(out.end(), t->grad().begin(), t->grad().end());
    } else {
      out.insert(out.end(), t->size(), 0.0);
    }
  }
  return out;
}

void BayesianModel::set_flat_gradients(std::span<const double> values) {
  if (values.size() != trainable_count()) throw DimensionError("flat gradient length mismatch");
  std::size_t offset = 0;
  for (Tensor* t : parameters()) {
    auto g = t->grad();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), t->size(), g.begin());
    offset += t->size();
  }
}

void BayesianModel::set_dropout_mode(DropoutMode mode) {
  for (Layer& layer : layers_) {
    if (auto* drop = std::get_if<DropoutLayer>(&layer)) drop->mode = mode;
  }
}

}  // namespace sampar
