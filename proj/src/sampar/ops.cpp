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

#include "sampar/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sampar/errors.hpp"

namespace sampar {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data().data(), static_cast<Eigen::Index>(t.shape()[0]),
                        static_cast<Eigen::Index>(t.shape()[1]));
}

MatrixMap as_matrix(std::span<double> data, std::size_t rows, std::size_t cols) {
  return MatrixMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError("operands recorded on different tapes");
}

void require_same_shape(const char* op, Var a, Var b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

// y = f(x) elementwise; dfdx(x, y) gives the local derivative.
template <class F, class D>
Var unary(Var x, F f, D dfdx) {
  Tape& tape = x.tape();
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return tape.record(std::move(out), {x.id()}, [dfdx](Tape& t, std::size_t self) {
    const std::size_t src = t.inputs(self)[0];
    if (!t.requires_grad(src)) return;
    const Tensor& xin = t.value(src);
    const Tensor& yout = t.value(self);
    auto g = t.grad(self);
    auto gx = t.grad(src);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(xin[i], yout[i]);
  });
}

}  // namespace

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw DomainError("inverse_softplus requires a positive argument");
  return y + std::log(-std::expm1(-y));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.shape()[1] != bv.shape()[0]) {
    throw DimensionError("matmul: incompatible shapes " + to_string(av.shape()) + " and " +
                         to_string(bv.shape()));
  }
  const std::size_t m = av.shape()[0];
  const std::size_t n = bv.shape()[1];
  Tensor out(Shape{m, n});
  as_matrix(out.data(), m, n).noalias() = as_matrix(av) * as_matrix(bv);
  return a.tape().record(std::move(out), {a.id(), b.id()}, [](Tape& t, std::size_t self) {
    const std::size_t ia = t.inputs(self)[0];
    const std::size_t ib = t.inputs(self)[1];
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    const std::size_t rows = A.shape()[0];
    const std::size_t inner = A.shape()[1];
    const std::size_t cols = B.shape()[1];
    auto G = as_matrix(t.grad(self), rows, cols);
    if (t.requires_grad(ia)) {
      as_matrix(t.grad(ia), rows, inner).noalias() += G * as_matrix(B).transpose();
    }
    if (t.requires_grad(ib)) {
      as_matrix(t.grad(ib), inner, cols).noalias() += as_matrix(A).transpose() * G;
    }
  });
}

namespace {

template <class F, class DA, class DB>
Var binary(const char* name, Var a, Var b, F f, DA dfda, DB dfdb) {
  require_same_shape(name, a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
  return a.tape().record(std::move(out), {a.id(), b.id()},
                         [dfda, dfdb](Tape& t, std::size_t self) {
                           const std::size_t ia = t.inputs(self)[0];
                           const std::size_t ib = t.inputs(self)[1];
                           const Tensor& A = t.value(ia);
                           const Tensor& B = t.value(ib);
                           auto g = t.grad(self);
                           if (t.requires_grad(ia)) {
                             auto ga = t.grad(ia);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfda(A[i], B[i]);
                           }
                           if (t.requires_grad(ib)) {
                             auto gb = t.grad(ib);
                             for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * dfdb(A[i], B[i]);
                           }
                         });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var div(Var a, Var b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(Var x) {
  const Tensor& in = x.value();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!(in[i] > 0.0)) {
      throw DomainError("log: non-positive value " + std::to_string(in[i]) + " at index " +
                        std::to_string(i));
    }
  }
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var softplus(Var x) {
  return unary(
      x, [](double v) { return softplus(v); }, [](double v, double) { return logistic(v); });
}

Var square(Var x) {
  return unary(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var scale(Var x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset) {
  return unary(
      x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var clamp_min(Var x, double floor) {
  return unary(
      x, [floor](double v) { return v < floor ? floor : v; },
      [floor](double v, double) { return v < floor ? 0.0 : 1.0; });
}

Var add_bias(Var x, Var bias) {
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 2 || bv.rank() != 1 || bv.shape()[0] != xv.shape()[1]) {
    throw DimensionError("add_bias: cannot add " + to_string(bv.shape()) + " to rows of " +
                         to_string(xv.shape()));
  }
  const std::size_t rows = xv.shape()[0];
  const std::size_t cols = xv.shape()[1];
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] + bv[c];
  }
  return x.tape().record(std::move(out), {x.id(), bias.id()}, [rows, cols](Tape& t, std::size_t self) {
    const std::size_t ix = t.inputs(self)[0];
    const std::size_t ib = t.inputs(self)[1];
    auto g = t.grad(self);
    if (t.requires_grad(ix)) {
      auto gx = t.grad(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

Var log_softmax(Var logits) {
  const Tensor& z = logits.value();
  if (z.rank() != 2 || z.shape()[1] < 2) {
    throw DimensionError("log_softmax expects [batch x classes>=2], got " + to_string(z.shape()));
  }
  const std::size_t rows = z.shape()[0];
  const std::size_t cols = z.shape()[1];
  Tensor out(z.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = z.data().data() + r * cols;
    const double peak = *std::max_element(row, row + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(row[c] - peak);
    const double lse = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = row[c] - lse;
  }
  return logits.tape().record(std::move(out), {logits.id()}, [rows, cols](Tape& t, std::size_t self) {
    const std::size_t src = t.inputs(self)[0];
    if (!t.requires_grad(src)) return;
    const Tensor& y = t.value(self);
    auto g = t.grad(self);
    auto gz = t.grad(src);
    for (std::size_t r = 0; r < rows; ++r) {
      double gsum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) gsum += g[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        gz[r * cols + c] += g[r * cols + c] - std::exp(y[r * cols + c]) * gsum;
      }
    }
  });
}

Var sum(Var x, std::optional<std::size_t> axis) {
  const Tensor& in = x.value();
  if (!axis) {
    double total = 0.0;
    for (double v : in.data()) total += v;
    return x.tape().record(Tensor::scalar(total), {x.id()}, [](Tape& t, std::size_t self) {
      const std::size_t src = t.inputs(self)[0];
      if (!t.requires_grad(src)) return;
      const double g = t.grad(self)[0];
      for (double& v : t.grad(src)) v += g;
    });
  }
  if (*axis >= in.rank()) {
    throw DimensionError("sum: axis " + std::to_string(*axis) + " out of range for rank " +
                         std::to_string(in.rank()));
  }
  if (in.rank() == 1) return sum(x);
  if (in.rank() != 2) throw DimensionError("sum along an axis supports rank <= 2");
  const std::size_t rows = in.shape()[0];
  const std::size_t cols = in.shape()[1];
  const bool over_rows = *axis == 0;
  Tensor out(Shape{over_rows ? cols : rows});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[over_rows ? c : r] += in[r * cols + c];
  }
  return x.tape().record(std::move(out), {x.id()}, [rows, cols, over_rows](Tape& t, std::size_t self) {
    const std::size_t src = t.inputs(self)[0];
    if (!t.requires_grad(src)) return;
    auto g = t.grad(self);
    auto gx = t.grad(src);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[over_rows ? c : r];
    }
  });
}

Var mean(Var x, std::optional<std::size_t> axis) {
  const Tensor& in = x.value();
  if (in.size() == 0) throw ContractError("mean of an empty tensor");
  std::size_t count = in.size();
  if (axis) {
    if (*axis >= in.rank()) {
      throw DimensionError("mean: axis " + std::to_string(*axis) + " out of range for rank " +
                           std::to_string(in.rank()));
    }
    count = in.shape()[*axis];
  }
  return scale(sum(x, axis), 1.0 / static_cast<double>(count));
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw ContractError("add_n needs at least one operand");
  std::vector<std::size_t> ids;
  ids.reserve(terms.size());
  for (const Var& v : terms) {
    require_same_shape("add_n", terms[0], v);
    ids.push_back(v.id());
  }
  Tensor out = terms[0].value();
  out.clear_grad();
  for (std::size_t k = 1; k < terms.size(); ++k) {
    const Tensor& v = terms[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  return terms[0].tape().record(std::move(out), std::move(ids), [](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    for (std::size_t src : t.inputs(self)) {
      if (!t.requires_grad(src)) continue;
      auto gx = t.grad(src);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

Var kl_standard_normal(Var mu, Var rho) {
  require_same_shape("kl_standard_normal", mu, rho);
  const Tensor& m = mu.value();
  const Tensor& r = rho.value();
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double sigma = softplus(r[i]);
    total += sigma * sigma + m[i] * m[i] - 1.0 - 2.0 * std::log(sigma);
  }
  return mu.tape().record(Tensor::scalar(0.5 * total), {mu.id(), rho.id()}, [](Tape& t, std::size_t self) {
    const std::size_t im = t.inputs(self)[0];
    const std::size_t ir = t.inputs(self)[1];
    const double g = t.grad(self)[0];
    const Tensor& m = t.value(im);
    const Tensor& r = t.value(ir);
    if (t.requires_grad(im)) {
      auto gm = t.grad(im);
      for (std::size_t i = 0; i < m.size(); ++i) gm[i] += g * m[i];
    }
    if (t.requires_grad(ir)) {
      auto gr = t.grad(ir);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double sigma = softplus(r[i]);
        gr[i] += g * (sigma - 1.0 / sigma) * logistic(r[i]);
      }
    }
  });
}

}  // namespace sampar
