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

#include "sampar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "sampar/errors.hpp"
#include "sampar/experiment.hpp"
#include "sampar/ops.hpp"
#include "sampar/predictive.hpp"
#include "sampar/results.hpp"

namespace sampar {

double max_relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_relative_error: length mismatch");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

namespace {

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

// Elementwise |a - b| / max(|a|, |b|, floor); worst case over every parameter.
double fd_relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

CheckResult gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelSpec spec;
    spec.input_dim = 3;
    spec.hidden = {6, 6};
    spec.output_dim = 2;
    spec.activation = Activation::tanh;
    BayesianModel model(spec, seed);
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Tensor x(Shape{5, 3}), y(Shape{5, 2});
    for (double& v : x.data()) v = u(engine);
    for (double& v : y.data()) v = u(engine);
    LossSpec loss;
    loss.kind = LossKind::gaussian_nll;
    loss.dataset_size = 10;

    auto evaluate = [&](bool backward) {
      Tape tape;
      std::vector<Var> preds;
      for (std::size_t s = 0; s < 3; ++s) {
        NoiseStream noise(derive_seed(seed, StreamTag::weight_sample, 0, 0, s));
        preds.push_back(model.forward_sampled(tape, x, noise));
      }
      Var total = elbo_loss(tape, preds, y, model.kl(tape), loss);
      if (backward) tape.backward(total);
      return total.value()[0];
    };
    model.zero_grad();
    evaluate(true);
    const double h = 1e-5;
    for (Tensor* p : model.parameters()) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        const double keep = (*p)[i];
        (*p)[i] = keep + h;
        const double up = evaluate(false);
        (*p)[i] = keep - h;
        const double down = evaluate(false);
        (*p)[i] = keep;
        worst = std::max(worst, fd_relative_error(p->grad()[i], (up - down) / (2.0 * h)));
      }
    }
  }
  return check("gradient_finite_difference", worst < 1e-4, "max relative error " + sci(worst));
}

CheckResult kl_check() {
  std::mt19937_64 engine(11);
  std::uniform_real_distribution<double> mu_dist(-1.0, 1.0), sigma_dist(0.1, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double mu = mu_dist(engine);
    const double sigma = sigma_dist(engine);
    Tensor m = Tensor::vector({mu});
    Tensor r = Tensor::vector({inverse_softplus(sigma)});
    VariationalParameter param{m, r};
    Tape tape;
    const double closed = kl_to_standard_normal(tape, param).value()[0];
    // E_q[log q(w) - log p(w)]
    double mc = 0.0;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
      const double e = normal(engine);
      const double w = mu + sigma * e;
      mc += -std::log(sigma) - 0.5 * e * e + 0.5 * w * w;
    }
    worst = std::max(worst, std::abs(closed - mc / draws));
  }
  VariationalParameter prior{Tensor::vector({0.0}), Tensor::vector({inverse_softplus(1.0)})};
  Tape tape;
  const double at_prior = kl_to_standard_normal(tape, prior).value()[0];
  return check("kl_closed_form_monte_carlo", worst < 0.01 && std::abs(at_prior) < 1e-15,
               "max |closed - MC| " + sci(worst) + ", KL at prior " + sci(at_prior));
}

struct RunOutput {
  std::vector<double> params;
  std::vector<std::vector<double>> step_grads;
  int exit_code = 0;
  std::string error;
};

RunOutput run_config(const TrainConfig& cfg, const SplitDataset& data) {
  RunOutput out;
  std::mutex mutex;
  TrainHooks hooks;
  hooks.on_gradients = [&](const StepInfo& info, std::span<const double> g) {
    if (info.rank != 0) return;
    std::lock_guard lock(mutex);
    out.step_grads.emplace_back(g.begin(), g.end());
  };
  LaunchOptions launch;
  DistributedRun run = train_distributed(cfg, data, launch, hooks);
  out.exit_code = run.launch.exit_code;
  out.error = run.launch.first_error;
  if (out.exit_code == 0) out.params = run.results[0].final_parameters;
  return out;
}

TrainConfig with_strategy(TrainConfig cfg, Strategy s, int p, int k = 1, int g = 1) {
  cfg.strategy = s;
  cfg.world_size = p;
  cfg.sample_groups = k;
  cfg.data_groups = g;
  return cfg;
}

TrainConfig short_run(const ExperimentConfig& exp) {
  TrainConfig cfg = exp.train;
  cfg.strategy = Strategy::sequential;
  cfg.world_size = 1;
  cfg.sample_groups = cfg.data_groups = 1;
  cfg.batch_mode = BatchMode::fixed_global;
  cfg.epochs = 1;
  cfg.max_steps = 5;
  cfg.check_consistency = true;
  return cfg;
}

void degenerate_checks(const ExperimentConfig& exp, const SplitDataset& data, std::vector<CheckResult>& out) {
  const TrainConfig base = short_run(exp);
  const RunOutput seq = run_config(base, data);
  for (Strategy s : {Strategy::sample_parallel, Strategy::data_parallel, Strategy::hybrid}) {
    const RunOutput par = run_config(with_strategy(base, s, 1), data);
    const bool same = seq.exit_code == 0 && par.exit_code == 0 && seq.params == par.params;
    out.push_back(check("degenerate_p1_" + to_string(s), same,
                        same ? "bit-identical parameters after " + std::to_string(base.max_steps) + " steps"
                             : "parameters differ " + seq.error + par.error));
  }
}

void linear_loss_check(const ExperimentConfig& exp, const SplitDataset& data, std::vector<CheckResult>& out) {
  TrainConfig base = short_run(exp);
  base.loss.kind = LossKind::mean_of_per_sample_loss;
  base.loss.per_sample = exp.train.loss.classification() ? PerSampleLoss::cross_entropy : PerSampleLoss::mse;
  base.loss.aggregation = Aggregation::approximate;
  base.augmentation_mode = AugmentationMode::shared;
  base.samples = 4;
  if (base.global_batch_size % 4 != 0) base.global_batch_size = std::max<std::size_t>(4, base.global_batch_size / 4 * 4);
  const RunOutput seq = run_config(base, data);
  double worst = 0.0;
  bool ok = seq.exit_code == 0;
  std::string failures = seq.error;
  for (const TrainConfig& cfg :
       {with_strategy(base, Strategy::sample_parallel, 2), with_strategy(base, Strategy::sample_parallel, 4),
        with_strategy(base, Strategy::data_parallel, 2), with_strategy(base, Strategy::data_parallel, 4),
        with_strategy(base, Strategy::hybrid, 4, 2, 2)}) {
    const RunOutput par = run_config(cfg, data);
    if (par.exit_code != 0 || !ok) {
      ok = false;
      failures += par.error;
      continue;
    }
    worst = std::max(worst, max_relative_error(par.params, seq.params));
  }
  out.push_back(check("linear_loss_strategy_equivalence", ok && worst <= 1e-9,
                      ok ? "max relative parameter difference " + sci(worst) : failures));
}

void exact_checks(const ExperimentConfig& exp, const SplitDataset& data, std::vector<CheckResult>& out) {
  if (exp.train.loss.classification()) return;
  for (LossKind kind : {LossKind::mse_of_mean, LossKind::gaussian_nll}) {
    TrainConfig base = short_run(exp);
    base.loss.kind = kind;
    base.loss.aggregation = Aggregation::approximate;
    base.augmentation_mode = AugmentationMode::shared;
    base.samples = 4;
    base.max_steps = 1;
    const RunOutput seq = run_config(base, data);
    TrainConfig exact = with_strategy(base, Strategy::sample_parallel, 2);
    exact.loss.aggregation = Aggregation::exact;
    const RunOutput ex = run_config(exact, data);
    const RunOutput approx = run_config(with_strategy(base, Strategy::sample_parallel, 2), data);
    const bool ran = seq.exit_code == 0 && ex.exit_code == 0 && approx.exit_code == 0 && !seq.step_grads.empty() &&
                     !ex.step_grads.empty() && !approx.step_grads.empty();
    if (!ran) {
      out.push_back(check("exact_aggregation_" + to_string(kind), false, seq.error + ex.error + approx.error));
      continue;
    }
    const double exact_err = max_relative_error(ex.step_grads[0], seq.step_grads[0]);
    const double gap = max_relative_error(approx.step_grads[0], seq.step_grads[0]);
    out.push_back(check("exact_aggregation_" + to_string(kind), exact_err <= 1e-10 && gap > 0.0,
                        "exact " + sci(exact_err) + ", approximate gap " + sci(gap)));
  }
}

CheckResult geometric_mean_check() {
  // One sample per worker; probabilities of the true class 0.5 and 0.125.
  const double probs[2] = {0.5, 0.125};
  LossSpec spec;
  spec.kind = LossKind::cross_entropy_of_mean_prob;
  double averaged = 0.0;
  for (double p : probs) {
    Tape tape;
    Var logits = tape.constant(Tensor::matrix(1, 2, {std::log(p / (1.0 - p)), 0.0}));
    Var loss = data_loss(tape, std::span<const Var>(&logits, 1), Tensor::matrix(1, 2, {1.0, 0.0}), spec,
                         SampleScope::partial);
    averaged += loss.value()[0] / 2.0;
  }
  const double expected = -std::log(std::sqrt(probs[0] * probs[1]));
  const double err = std::abs(averaged - expected);
  return check("geometric_mean_effect", err < 1e-12,
               "averaged loss " + format_real(averaged) + " vs -ln(geometric mean) " + format_real(expected));
}

CheckResult allreduce_check() {
  const int p = 4;
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool ok = true;
  for (int trial = 0; trial < 10 && ok; ++trial) {
    std::vector<std::vector<double>> inputs(p, std::vector<double>(17));
    for (auto& b : inputs) {
      for (double& v : b) v = u(engine);
    }
    std::vector<double> oracle = inputs[0];
    for (int k = 1; k < p; ++k) {
      for (std::size_t i = 0; i < oracle.size(); ++i) oracle[i] += (inputs[k][i] - oracle[i]) / (k + 1.0);
    }
    std::vector<std::vector<double>> got(p);
    LaunchOptions launch;
    launch.world_size = p;
    const LaunchResult r = launch_workers(launch, [&](ProcessGroup& g) {
      got[static_cast<std::size_t>(g.rank())] = g.allreduce_average(inputs[static_cast<std::size_t>(g.rank())]);
    });
    ok = r.exit_code == 0;
    for (const auto& v : got) ok = ok && v == oracle;
  }
  return check("allreduce_fixed_order", ok, ok ? "bit-identical to the rank-order fold" : "mismatch");
}

CheckResult mc_predict_check() {
  ModelSpec spec;
  spec.input_dim = 4;
  spec.hidden = {16, 16};
  spec.output_dim = 3;
  spec.method = InferenceMethod::mc_dropout;
  spec.dropout_p = 0.2;
  BayesianModel reference(spec, 3);
  Tensor x(Shape{6, 4});
  std::mt19937_64 engine(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : x.data()) v = n(engine);
  const PredictiveSeeds seeds{9, 0, 0};
  const Predictive seq = mc_predict(reference, x, 8, seeds);
  std::vector<Predictive> got(4);
  LaunchOptions launch;
  launch.world_size = 4;
  const LaunchResult r = launch_workers(launch, [&](ProcessGroup& g) {
    BayesianModel model(spec, 3);
    got[static_cast<std::size_t>(g.rank())] = mc_predict(model, x, 8, seeds, g);
  });
  double worst = 0.0;
  for (const Predictive& p : got) worst = std::max(worst, max_relative_error(p.mean.data(), seq.mean.data()));
  return check("mc_predict_parallel_mean", r.exit_code == 0 && worst <= 1e-10, "max relative difference " + sci(worst));
}

}  // namespace

std::vector<CheckResult> run_verify(const ExperimentConfig& cfg, const SplitDataset& data) {
  std::vector<CheckResult> out;
  out.push_back(gradient_check());
  out.push_back(kl_check());
  degenerate_checks(cfg, data, out);
  linear_loss_check(cfg, data, out);
  exact_checks(cfg, data, out);
  out.push_back(geometric_mean_check());
  out.push_back(allreduce_check());
  out.push_back(mc_predict_check());
  return out;
}

void write_verify_csv(const std::filesystem::path& path, const std::vector<CheckResult>& checks) {
  std::ostringstream out;
  out << "# sampar verify schema v" << kResultsSchemaVersion << "\n";
  out << "check,status,detail\n";
  for (const CheckResult& c : checks) {
    std::string detail = c.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    out << c.name << "," << (c.passed ? "pass" : "fail") << "," << detail << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace sampar
