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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sampar/dropout.hpp"
#include "sampar/errors.hpp"
#include "sampar/launcher.hpp"
#include "sampar/ops.hpp"
#include "sampar/predictive.hpp"

using namespace sampar;

namespace {

ModelSpec dropout_spec(double p = 0.2) {
  ModelSpec spec;
  spec.input_dim = 4;
  spec.hidden = {16, 16};
  spec.output_dim = 3;
  spec.method = InferenceMethod::mc_dropout;
  spec.dropout_p = p;
  return spec;
}

Tensor inputs(std::size_t rows, std::uint64_t seed) {
  Tensor x(Shape{rows, 4});
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> n;
  for (double& v : x.data()) v = n(engine);
  return x;
}

}  // namespace

TEST_CASE("dropout_forward identities") {
  const Tensor x = inputs(5, 1);
  Tape tape;
  NoiseStream noise(3);
  CHECK(dropout_forward(DropoutLayer{0.0, DropoutMode::stochastic}, tape.constant(x), noise).value().values() ==
        x.values());
  CHECK(dropout_forward(DropoutLayer{0.7, DropoutMode::deterministic}, tape.constant(x), noise).value().values() ==
        x.values());
}

TEST_CASE("dropout probability must be below one") {
  CHECK_THROWS_AS((DropoutLayer{1.0, DropoutMode::stochastic}.validate()), ConfigError);
  CHECK_THROWS_AS((DropoutLayer{-0.1, DropoutMode::stochastic}.validate()), ConfigError);
  ModelSpec spec = dropout_spec(1.0);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("inverted dropout is unbiased") {
  Tape tape;
  NoiseStream noise(11);
  const std::size_t n = 1000000;
  const Tensor out =
      dropout_forward(DropoutLayer{0.5, DropoutMode::stochastic}, tape.constant(Tensor(Shape{n}, 1.0)), noise).value();
  CHECK(std::abs(oracle::mean(out.values()) - 1.0) < 0.01);
  for (double v : out.values()) CHECK((v == 0.0 || v == 2.0));

  // 1e5 passes over a magnitude-1 vector, p = 0.1: elementwise mean within 1%.
  const Tensor x = Tensor::vector({1.0, -1.0, 1.0, -1.0});
  std::vector<double> acc(4, 0.0);
  NoiseStream stream(12);
  for (int i = 0; i < 100000; ++i) {
    Tape t;
    const Tensor y = dropout_forward(DropoutLayer{0.1, DropoutMode::stochastic}, t.constant(x), stream).value();
    for (std::size_t k = 0; k < 4; ++k) acc[k] += y[k];
  }
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(acc[k] / 100000 - x[k]) < 0.01);
}

TEST_CASE("dropout gradient flows through kept units only") {
  Tensor x = Tensor::vector({1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  x.zero_grad();
  Tape tape;
  NoiseStream noise(6);
  Var y = dropout_forward(DropoutLayer{0.5, DropoutMode::stochastic}, tape.parameter(x), noise);
  tape.backward(sum(y));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == y.value()[i] / x[i]);
}

TEST_CASE("mc_predict examples") {
  BayesianModel model(dropout_spec(), 2);
  const Tensor x = inputs(6, 3);
  const PredictiveSeeds seeds{5, 0, 0};

  CHECK_THROWS_AS(mc_predict(model, x, 0, seeds), ContractError);

  const Predictive one = mc_predict(model, x, 1, seeds);
  for (double s : one.stddev.values()) CHECK(s == 0.0);
  NoiseStream first(seeds.for_sample(0));
  Tape tape;
  CHECK(one.mean.values() == model.forward_sampled(tape, x, first).value().values());

  // Mean and population std against an explicit loop over passes.
  const std::size_t S = 7;
  const Predictive p = mc_predict(model, x, S, seeds);
  std::vector<std::vector<double>> passes;
  for (std::size_t s = 0; s < S; ++s) {
    NoiseStream noise(seeds.for_sample(s));
    Tape t;
    passes.push_back(model.forward_sampled(t, x, noise).value().values());
  }
  for (std::size_t i = 0; i < p.mean.size(); ++i) {
    std::vector<double> column;
    for (const auto& pass : passes) column.push_back(pass[i]);
    CHECK(p.mean[i] == doctest::Approx(oracle::mean(column)).epsilon(1e-12));
    CHECK(p.stddev[i] == doctest::Approx(oracle::population_std(column)).epsilon(1e-9));
  }

  model.set_dropout_mode(DropoutMode::deterministic);
  const Predictive det = mc_predict(model, x, 16, seeds);
  for (double s : det.stddev.values()) CHECK(s == 0.0);
}

TEST_CASE("std of the predictive mean shrinks like 1/sqrt(S)") {
  BayesianModel model(dropout_spec(0.3), 6);
  const Tensor x = inputs(1, 9);
  auto spread = [&](std::size_t S) {
    std::vector<double> means;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      means.push_back(mc_predict(model, x, S, PredictiveSeeds{1000 + rep, 0, 0}).mean[0]);
    }
    return oracle::population_std(means);
  };
  const double ratio = spread(64) / spread(4);
  INFO("ratio " << ratio);
  CHECK(ratio >= 0.17);
  CHECK(ratio <= 0.33);
}

TEST_CASE("sample-parallel mc_predict matches sequential") {
  const ModelSpec spec = dropout_spec();
  BayesianModel reference(spec, 3);
  const Tensor x = inputs(6, 4);
  const PredictiveSeeds seeds{9, 1, 2};
  const Predictive seq = mc_predict(reference, x, 8, seeds);
  for (int p : {1, 2, 4, 8}) {
    std::vector<Predictive> got(static_cast<std::size_t>(p));
    LaunchOptions launch;
    launch.world_size = p;
    const LaunchResult r = launch_workers(launch, [&](ProcessGroup& g) {
      BayesianModel model(spec, 3);
      got[static_cast<std::size_t>(g.rank())] = mc_predict(model, x, 8, seeds, g);
    });
    REQUIRE(r.exit_code == 0);
    for (const Predictive& pr : got) {
      CHECK(oracle::max_relative_difference(pr.mean.values(), seq.mean.values()) <= 1e-10);
      CHECK(oracle::max_relative_difference(pr.stddev.values(), seq.stddev.values()) <= 1e-8);
    }
  }
  LaunchOptions launch;
  launch.world_size = 3;
  const LaunchResult bad = launch_workers(launch, [&](ProcessGroup& g) {
    BayesianModel model(spec, 3);
    mc_predict(model, x, 8, seeds, g);
  });
  CHECK(bad.exit_code == kExitConfig);
  CHECK(bad.first_error.find("S mod P == 0") != std::string::npos);
}
