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
#include <functional>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sampar/errors.hpp"
#include "sampar/ops.hpp"
#include "sampar/tape.hpp"

using namespace sampar;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& engine, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(engine);
  return t;
}

// Checks d(sum(w * f(x)))/dx against central differences, w fixed random.
double fd_worst(Tensor& x, const std::function<Var(Var)>& f, const Tensor& weights) {
  auto loss = [&](bool backward) {
    Tape tape;
    Var y = f(tape.parameter(x));
    Var l = sum(mul(y, tape.constant(weights)));
    if (backward) tape.backward(l);
    return l.value()[0];
  };
  x.zero_grad();
  loss(true);
  const std::vector<double> analytic(x.grad().begin(), x.grad().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double numeric = oracle::central_difference([&] { return loss(false); }, x[i]);
    worst = std::max(worst, oracle::relative_error(analytic[i], numeric));
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul values and backward") {
  Tape tape;
  Var id = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  Var m = tape.constant(Tensor::matrix(2, 2, {5, 6, 7, 8}));
  CHECK(matmul(id, m).value().values() == std::vector<double>{5, 6, 7, 8});

  Tensor a = Tensor::matrix(1, 2, {1, 2});
  Tensor b = Tensor::matrix(2, 1, {3, 4});
  a.zero_grad();
  b.zero_grad();
  Tape t2;
  Var c = matmul(t2.parameter(a), t2.parameter(b));
  CHECK(c.value()[0] == 11.0);
  t2.backward(sum(c));
  CHECK(a.grad()[0] == doctest::Approx(3.0));
  CHECK(a.grad()[1] == doctest::Approx(4.0));
  CHECK(b.grad()[0] == doctest::Approx(1.0));
  CHECK(b.grad()[1] == doctest::Approx(2.0));

  // Same numbers from a finite-difference oracle at step 1e-6.
  Tape t3;
  auto f = [&] {
    Tape t;
    return sum(matmul(t.constant(a), t.constant(b))).value()[0];
  };
  CHECK(oracle::central_difference(f, a[0], 1e-6) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(oracle::central_difference(f, b[1], 1e-6) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape tape;
  Var a = tape.constant(Tensor(Shape{2, 3}));
  Var b = tape.constant(Tensor(Shape{2, 3}));
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("elementwise examples") {
  Tape tape;
  CHECK(relu(tape.constant(Tensor::vector({-1, 0, 2}))).value().values() == std::vector<double>{0, 0, 2});
  CHECK(softplus(tape.constant(Tensor::scalar(0.0))).value()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(softplus(0.0) - 0.6931471805599453) < 1e-12);

  Tensor x = Tensor::scalar(0.0);
  x.zero_grad();
  Tape t2;
  t2.backward(softplus(t2.parameter(x)));
  CHECK(x.grad()[0] == 0.5);
}

TEST_CASE("log of a non-positive value names the index") {
  Tape tape;
  try {
    log(tape.constant(Tensor::vector({1.0, 2.0, -3.0})));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  CHECK_THROWS_AS(log(tape.constant(Tensor::vector({0.0}))), DomainError);
}

TEST_CASE("log_softmax examples") {
  Tape tape;
  const Tensor half = log_softmax(tape.constant(Tensor::matrix(1, 2, {0, 0}))).value();
  CHECK(half[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(half[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

  const Tensor big = log_softmax(tape.constant(Tensor::matrix(1, 2, {1000, 0}))).value();
  CHECK(std::isfinite(big[0]));
  CHECK(std::abs(big[0]) < 1e-300);
  CHECK(big[1] == doctest::Approx(-1000.0));

  // Direct evaluation: x - log(e + e^2 + e^3).
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  const Tensor r = log_softmax(tape.constant(Tensor::matrix(1, 3, {1, 2, 3}))).value();
  for (int i = 0; i < 3; ++i) CHECK(r[i] == doctest::Approx(i + 1 - lse).epsilon(1e-14));
  CHECK(r[0] == doctest::Approx(-2.4076).epsilon(1e-4));
  CHECK(r[2] == doctest::Approx(-0.4076).epsilon(1e-3));
}

TEST_CASE("log_softmax rows exponentiate to one") {
  std::mt19937_64 engine(3);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const Tensor out = log_softmax(tape.constant(random_tensor(Shape{4, 5}, engine, -30, 30))).value();
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 5; ++c) s += std::exp(out.at(r, c));
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("reductions") {
  Tape tape;
  CHECK(mean(tape.constant(Tensor::vector({1, 2, 3}))).value()[0] == 2.0);
  CHECK(sum(tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), 0).value().values() == std::vector<double>{4, 6});
  CHECK_THROWS_AS(sum(tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), 2), DimensionError);

  Tensor ab = Tensor::vector({3.0, 7.0});
  ab.zero_grad();
  Tape t2;
  t2.backward(mean(t2.parameter(ab)));
  CHECK(ab.grad()[0] == 0.5);
  CHECK(ab.grad()[1] == 0.5);
}

TEST_CASE("backward contract and accumulation") {
  Tensor p = Tensor::vector({1.0, -2.0});
  p.zero_grad();
  {
    Tape tape;
    Var c = tape.constant(Tensor::scalar(4.0));
    tape.parameter(p);
    tape.backward(c);
    CHECK(p.grad()[0] == 0.0);
    CHECK(p.grad()[1] == 0.0);
  }
  Tape tape;
  Var l = sum(square(tape.parameter(p)));
  tape.backward(l);
  const std::vector<double> once(p.grad().begin(), p.grad().end());
  tape.backward(l);
  CHECK(p.grad()[0] == 2.0 * once[0]);
  CHECK(p.grad()[1] == 2.0 * once[1]);

  CHECK_THROWS_AS(tape.backward(tape.parameter(p)), ContractError);
}

TEST_CASE("finite differences agree on every differentiable op") {
  std::mt19937_64 engine(17);
  struct Case {
    const char* name;
    std::function<Var(Var)> f;
    double lo, hi;
  };
  std::vector<Case> cases = {
      {"relu", [](Var x) { return relu(x); }, -2, 2},
      {"tanh", [](Var x) { return tanh(x); }, -2, 2},
      {"exp", [](Var x) { return exp(x); }, -2, 2},
      {"log", [](Var x) { return log(x); }, 0.1, 2},
      {"softplus", [](Var x) { return softplus(x); }, -2, 2},
      {"square", [](Var x) { return square(x); }, -2, 2},
      {"log_softmax", [](Var x) { return log_softmax(x); }, -2, 2},
      {"add_self", [](Var x) { return add(x, x); }, -2, 2},
      {"sub", [](Var x) { return sub(x, tanh(x)); }, -2, 2},
      {"mul", [](Var x) { return mul(x, exp(x)); }, -2, 2},
      {"div", [](Var x) { return div(x, add_scalar(square(x), 1.0)); }, -2, 2},
      {"sum_axis0", [](Var x) { return sum(mul(x, x), 0); }, -2, 2},
      {"mean_axis1", [](Var x) { return mean(mul(x, x), 1); }, -2, 2},
      {"clamp_min", [](Var x) { return clamp_min(x, 0.3); }, -2, 2},
  };
  for (const Case& c : cases) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Tensor x = random_tensor(Shape{3, 4}, engine, c.lo, c.hi);
      // Keep kinks (relu at 0, clamp at 0.3) out of the difference stencil.
      for (double& v : x.data()) {
        if (std::abs(v) < 1e-3) v += 0.01;
        if (std::abs(v - 0.3) < 1e-3) v += 0.01;
      }
      Tensor w = random_tensor(c.f(Tape().constant(x)).shape(), engine);
      worst = std::max(worst, fd_worst(x, c.f, w));
    }
    INFO(c.name);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("finite differences on binary ops and the bias broadcast") {
  std::mt19937_64 engine(23);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor a = random_tensor(Shape{3, 4}, engine);
    Tensor b = random_tensor(Shape{4, 2}, engine);
    Tensor bias = random_tensor(Shape{2}, engine);
    Tensor mu = random_tensor(Shape{5}, engine);
    Tensor rho = random_tensor(Shape{5}, engine);
    Tensor w = random_tensor(Shape{3, 2}, engine);
    for (Tensor* t : {&a, &b, &bias, &mu, &rho}) t->zero_grad();
    auto loss = [&](bool backward) {
      Tape tape;
      Var y = tanh(add_bias(matmul(tape.parameter(a), tape.parameter(b)), tape.parameter(bias)));
      Var l = add(sum(mul(y, tape.constant(w))), kl_standard_normal(tape.parameter(mu), tape.parameter(rho)));
      if (backward) tape.backward(l);
      return l.value()[0];
    };
    loss(true);
    for (Tensor* t : {&a, &b, &bias, &mu, &rho}) {
      const std::vector<double> g(t->grad().begin(), t->grad().end());
      for (std::size_t i = 0; i < t->size(); ++i) {
        const double numeric = oracle::central_difference([&] { return loss(false); }, (*t)[i]);
        INFO("trial " << trial << " index " << i << " analytic " << g[i] << " numeric " << numeric);
        CHECK(oracle::relative_error(g[i], numeric) < 1e-4);
      }
    }
  }
}

TEST_CASE("tape replay is bit-identical") {
  std::mt19937_64 engine(5);
  Tensor a = random_tensor(Shape{4, 3}, engine);
  Tensor b = random_tensor(Shape{3, 3}, engine);
  auto run = [&] {
    a.zero_grad();
    Tape tape;
    Var l = sum(softplus(matmul(tape.parameter(a), tape.constant(b))));
    tape.backward(l);
    std::vector<double> out(a.grad().begin(), a.grad().end());
    out.push_back(l.value()[0]);
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS(Tensor(Shape{2, 3}, std::vector<double>(5)));
  Tensor t(Shape{2, 3});
  CHECK(t.size() == 6);
  t.zero_grad();
  CHECK(t.grad().size() == t.size());
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
}
