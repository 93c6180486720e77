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

#include "sampar/losses.hpp"

#include <cmath>
#include <numbers>

#include "sampar/errors.hpp"
#include "sampar/ops.hpp"
#include "sampar/predictive.hpp"

namespace sampar {

// ---------------------------------------------------------------------------
// SampleStatistics

// Welford's update, so that identical samples give exactly their value as
// the mean and exactly 0 as the variance.
SampleStatistics SampleStatistics::from_samples(std::span<const Tensor> samples) {
  if (samples.empty()) throw ContractError("statistics of zero samples");
  const Shape& shape = samples[0].shape();
  SampleStatistics s{Tensor(shape), Tensor(shape), 0};
  for (const Tensor& x : samples) {
    if (x.shape() != shape) throw DimensionError("samples have different shapes");
    const double k = static_cast<double>(++s.count);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double before = x[i] - s.mean[i];
      s.mean[i] += before / k;
      s.central[i] += before * (x[i] - s.mean[i]);
    }
  }
  for (double& v : s.central.data()) v /= static_cast<double>(s.count);
  return s;
}

Tensor SampleStatistics::second_moment() const {
  Tensor q(mean.shape());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = central[i] + mean[i] * mean[i];
  return q;
}

Tensor SampleStatistics::stddev() const {
  Tensor s = variance();
  for (double& v : s.data()) v = std::sqrt(v);
  return s;
}

std::vector<double> SampleStatistics::pack() const {
  std::vector<double> out;
  out.reserve(1 + 2 * mean.size());
  out.push_back(static_cast<double>(count));
  out.insert(out.end(), mean.data().begin(), mean.data().end());
  out.insert(out.end(), central.data().begin(), central.data().end());
  return out;
}

SampleStatistics SampleStatistics::unpack(std::span<const double> packed, const Shape& shape) {
  const std::size_t n = element_count(shape);
  if (packed.size() != 1 + 2 * n) throw DimensionError("packed statistics length mismatch");
  SampleStatistics s{Tensor(shape, std::vector<double>(packed.begin() + 1, packed.begin() + 1 + static_cast<std::ptrdiff_t>(n))),
                     Tensor(shape, std::vector<double>(packed.begin() + 1 + static_cast<std::ptrdiff_t>(n), packed.end())),
                     static_cast<std::size_t>(packed[0])};
  return s;
}

SampleStatistics merge_statistics(const SampleStatistics& a, const SampleStatistics& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  if (a.mean.shape() != b.mean.shape()) {
    throw DimensionError("merge_statistics: shape mismatch " + to_string(a.mean.shape()) + " vs " +
                         to_string(b.mean.shape()));
  }
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double total = na + nb;
  SampleStatistics out{Tensor(a.mean.shape()), Tensor(a.mean.shape()), a.count + b.count};
  for (std::size_t i = 0; i < out.mean.size(); ++i) {
    const double delta = b.mean[i] - a.mean[i];
    out.mean[i] = (na * a.mean[i] + nb * b.mean[i]) / total;
    out.central[i] = (na * a.central[i] + nb * b.central[i]) / total + delta * delta * ((na * nb) / (total * total));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LossSpec

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::mse_of_mean: return "mse_of_mean";
    case LossKind::cross_entropy_of_mean_prob: return "cross_entropy_of_mean_prob";
    case LossKind::gaussian_nll: return "gaussian_nll";
    case LossKind::mean_of_per_sample_loss: return "mean_of_per_sample_loss";
  }
  return "?";
}

std::string to_string(Aggregation aggregation) {
  return aggregation == Aggregation::approximate ? "approximate" : "exact";
}

std::string to_string(PerSampleLoss loss) { return loss == PerSampleLoss::mse ? "mse" : "cross_entropy"; }

LossKind parse_loss_kind(const std::string& text) {
  for (LossKind k : {LossKind::mse_of_mean, LossKind::cross_entropy_of_mean_prob, LossKind::gaussian_nll,
                     LossKind::mean_of_per_sample_loss}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown loss kind '" + text + "'");
}

Aggregation parse_aggregation(const std::string& text) {
  if (text == "approximate") return Aggregation::approximate;
  if (text == "exact") return Aggregation::exact;
  throw ConfigError("unknown aggregation '" + text + "' (expected approximate|exact)");
}

PerSampleLoss parse_per_sample_loss(const std::string& text) {
  if (text == "mse") return PerSampleLoss::mse;
  if (text == "cross_entropy") return PerSampleLoss::cross_entropy;
  throw ConfigError("unknown per-sample loss '" + text + "' (expected mse|cross_entropy)");
}

void LossSpec::validate() const {
  if (dataset_size < 1) throw ConfigError("loss.dataset_size must be >= 1");
  if (!(variance_floor > 0.0)) throw ConfigError("loss.variance_floor must be positive");
  if (!(kl_weight >= 0.0)) throw ConfigError("loss.kl_weight must be >= 0");
}

bool LossSpec::classification() const {
  return kind == LossKind::cross_entropy_of_mean_prob ||
         (kind == LossKind::mean_of_per_sample_loss && per_sample == PerSampleLoss::cross_entropy);
}

// ---------------------------------------------------------------------------
// Tape-recorded data terms

namespace {

Var sample_mean(std::span<const Var> xs) {
  return scale(add_n(xs), 1.0 / static_cast<double>(xs.size()));
}

// -(1/B) sum_{b,c} y_bc * logp_bc
Var cross_entropy(Var log_probs, Var one_hot) {
  const double batch = static_cast<double>(log_probs.shape()[0]);
  return scale(sum(mul(one_hot, log_probs)), -1.0 / batch);
}

}  // namespace

Var data_loss(Tape& tape, std::span<const Var> predictions, const Tensor& targets, const LossSpec& spec,
              SampleScope scope) {
  if (predictions.empty()) throw ContractError("loss needs at least one prediction sample");
  for (const Var& p : predictions) {
    if (p.shape() != targets.shape()) {
      throw DimensionError("prediction shape " + to_string(p.shape()) + " does not match targets " +
                           to_string(targets.shape()));
    }
  }
  Var y = tape.constant(targets);

  switch (spec.kind) {
    case LossKind::mse_of_mean:
      return mean(square(sub(sample_mean(predictions), y)));

    case LossKind::cross_entropy_of_mean_prob: {
      std::vector<Var> probs;
      probs.reserve(predictions.size());
      for (const Var& z : predictions) probs.push_back(exp(log_softmax(z)));
      return cross_entropy(log(sample_mean(probs)), y);
    }

    case LossKind::gaussian_nll: {
      if (scope == SampleScope::complete && predictions.size() < 2) {
        throw ContractError("gaussian_nll needs at least two samples, got " + std::to_string(predictions.size()));
      }
      Var m = sample_mean(predictions);
      std::vector<Var> squares;
      squares.reserve(predictions.size());
      for (const Var& p : predictions) squares.push_back(square(sub(p, m)));
      Var v = clamp_min(sample_mean(squares), spec.variance_floor);
      Var term = add(log(scale(v, 2.0 * std::numbers::pi)), div(square(sub(y, m)), v));
      return scale(mean(term), 0.5);
    }

    case LossKind::mean_of_per_sample_loss: {
      std::vector<Var> losses;
      losses.reserve(predictions.size());
      for (const Var& p : predictions) {
        losses.push_back(spec.per_sample == PerSampleLoss::mse ? mean(square(sub(p, y)))
                                                               : cross_entropy(log_softmax(p), y));
      }
      return sample_mean(losses);
    }
  }
  throw ContractError("unhandled loss kind");
}

Var elbo_loss(Tape& tape, std::span<const Var> predictions, const Tensor& targets, Var kl, const LossSpec& spec,
              SampleScope scope) {
  spec.validate();
  Var data = data_loss(tape, predictions, targets, spec, scope);
  return add(data, scale(kl, spec.kl_weight / static_cast<double>(spec.dataset_size)));
}

// ---------------------------------------------------------------------------
// Statistic-based evaluation and exact gradients

namespace {

double raw_variance(const SampleStatistics& s, std::size_t i) { return s.central[i]; }

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

}  // namespace

double gaussian_nll(const SampleStatistics& stats, const Tensor& targets, double variance_floor) {
  if (stats.count < 2) {
    throw ContractError("gaussian_nll needs at least two samples, got " + std::to_string(stats.count));
  }
  require_same(stats.mean, targets, "gaussian_nll");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double v = std::max(raw_variance(stats, i), variance_floor);
    const double r = targets[i] - stats.mean[i];
    total += 0.5 * (std::log(2.0 * std::numbers::pi * v) + r * r / v);
  }
  return total / static_cast<double>(targets.size());
}

Tensor loss_statistic_input(const Tensor& prediction, const LossSpec& spec) {
  return spec.kind == LossKind::cross_entropy_of_mean_prob ? softmax_rows(prediction) : prediction;
}

SampleStatistics local_loss_statistics(std::span<const Tensor> predictions, const LossSpec& spec) {
  if (spec.kind != LossKind::cross_entropy_of_mean_prob) return SampleStatistics::from_samples(predictions);
  std::vector<Tensor> probs;
  probs.reserve(predictions.size());
  for (const Tensor& p : predictions) probs.push_back(softmax_rows(p));
  return SampleStatistics::from_samples(probs);
}

double data_loss_from_statistics(const SampleStatistics& stats, const Tensor& targets, const LossSpec& spec) {
  require_same(stats.mean, targets, "loss statistics");
  const double n = static_cast<double>(targets.size());
  switch (spec.kind) {
    case LossKind::mse_of_mean: {
      double total = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const double r = stats.mean[i] - targets[i];
        total += r * r;
      }
      return total / n;
    }
    case LossKind::cross_entropy_of_mean_prob: {
      double total = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] != 0.0) total += targets[i] * std::log(stats.mean[i]);
      }
      return -total / static_cast<double>(targets.rows());
    }
    case LossKind::gaussian_nll: {
      double total = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const double v = std::max(raw_variance(stats, i), spec.variance_floor);
        const double r = targets[i] - stats.mean[i];
        total += 0.5 * (std::log(2.0 * std::numbers::pi * v) + r * r / v);
      }
      return total / n;
    }
    case LossKind::mean_of_per_sample_loss:
      throw ContractError("mean_of_per_sample_loss is not a function of sample statistics");
  }
  throw ContractError("unhandled loss kind");
}

std::vector<std::vector<double>> exact_loss_gradient(std::span<const Tensor> local_predictions,
                                                     const Tensor& targets, const SampleStatistics& global,
                                                     const LossSpec& spec, std::size_t expected_count) {
  if (spec.kind == LossKind::mean_of_per_sample_loss) {
    throw ContractError("exact aggregation is not defined for mean_of_per_sample_loss");
  }
  if (global.count != expected_count) {
    throw ContractError("exact aggregation expects statistics over " + std::to_string(expected_count) +
                        " samples, got " + std::to_string(global.count) + " (not reduced across workers?)");
  }
  require_same(global.mean, targets, "exact_loss_gradient");
  const double n = static_cast<double>(targets.size());
  const double s = static_cast<double>(global.count);
  std::vector<std::vector<double>> seeds;
  seeds.reserve(local_predictions.size());

  for (const Tensor& pred : local_predictions) {
    require_same(pred, targets, "exact_loss_gradient");
    std::vector<double> g(pred.size());
    switch (spec.kind) {
      case LossKind::mse_of_mean:
        // L = (1/N) sum (m - y)^2,  m = (1/S) sum_s yhat_s
        // dL/dyhat_s = 2 (m - y) / (N S)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (global.mean[i] - targets[i]) / (n * s);
        break;

      case LossKind::gaussian_nll:
        // L = (1/N) sum 0.5 [ln(2 pi v) + (y - m)^2 / v],  v = max(E[(yhat - m)^2], floor)
        // dm/dyhat_s = 1/S,  dv/dyhat_s = 2 (yhat_s - m) / S  (0 where the floor is active)
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double raw = raw_variance(global, i);
          const bool floored = raw < spec.variance_floor;
          const double v = floored ? spec.variance_floor : raw;
          const double r = targets[i] - global.mean[i];
          const double dl_dm = -r / (n * v);
          const double dl_dv = 0.5 * (1.0 / v - r * r / (v * v)) / n;
          g[i] = dl_dm / s;
          if (!floored) g[i] += dl_dv * 2.0 * (pred[i] - global.mean[i]) / s;
        }
        break;

      case LossKind::cross_entropy_of_mean_prob: {
        // L = -(1/B) sum y log pbar,  pbar = (1/S) sum_s softmax(z_s)
        // dL/dp_s = -y / (B S pbar);  chain through softmax:
        // dL/dz_s,j = p_s,j (dL/dp_s,j - sum_c dL/dp_s,c p_s,c)
        const std::size_t rows = pred.rows();
        const std::size_t cols = pred.cols();
        const Tensor p = softmax_rows(pred);
        for (std::size_t r = 0; r < rows; ++r) {
          std::vector<double> gp(cols, 0.0);
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            if (targets[i] != 0.0) gp[c] = -targets[i] / (static_cast<double>(rows) * s * global.mean[i]);
            dot += gp[c] * p[i];
          }
          for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] = p[r * cols + c] * (gp[c] - dot);
        }
        break;
      }

      case LossKind::mean_of_per_sample_loss:
        throw ContractError("exact aggregation is not defined for mean_of_per_sample_loss");
    }
    seeds.push_back(std::move(g));
  }
  return seeds;
}

}  // namespace sampar
