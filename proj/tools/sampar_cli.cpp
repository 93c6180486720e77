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

// sampar command-line entry point. Everything goes through the C API.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>
#include <utility>

#include "CLI11.hpp"
#include "sampar/sampar.h"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::string transport;
  int port = -1;
  int kill_rank = -1;
  int kill_after_ms = 0;
};

using ConfigPtr = std::unique_ptr<sampar_config, decltype(&sampar_config_destroy)>;

int report(sampar_status status) {
  std::cerr << "sampar: " << sampar_last_error() << "\n";
  return static_cast<int>(status);
}

int run(const std::string& subcommand, const Flags& flags) {
  sampar_config* raw = nullptr;
  sampar_status status = flags.config.empty() ? sampar_config_create(&raw) : sampar_config_load(flags.config.c_str(), &raw);
  if (status != SAMPAR_OK) return report(status);
  ConfigPtr config(raw, &sampar_config_destroy);

  for (const std::string& o : flags.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::cerr << "sampar: override '" << o << "' is not key=value\n";
      return SAMPAR_ERR_CONFIG;
    }
    status = sampar_config_set(config.get(), o.substr(0, eq).c_str(), o.substr(eq + 1).c_str());
    if (status != SAMPAR_OK) return report(status);
  }
  if (!flags.transport.empty()) {
    status = sampar_config_set(config.get(), "run.transport", flags.transport.c_str());
    if (status != SAMPAR_OK) return report(status);
  }
  if (flags.port >= 0) {
    status = sampar_config_set(config.get(), "run.port", std::to_string(flags.port).c_str());
    if (status != SAMPAR_OK) return report(status);
  }

  sampar_run_options options;
  sampar_run_options_init(&options);
  options.output_dir = flags.out.c_str();
  options.kill_rank = flags.kill_rank;
  options.kill_after_ms = flags.kill_after_ms;

  std::string summary(1 << 16, '\0');
  status = sampar_run(config.get(), subcommand.c_str(), &options, summary.data(), summary.size());
  summary.resize(summary.find('\0'));
  const bool report_text = summary.rfind("PASS", 0) == 0 || summary.rfind("FAIL", 0) == 0;
  if (subcommand == "verify" && report_text) {
    std::cout << summary;
    if (status != SAMPAR_OK) std::cerr << "sampar: verify: some checks failed\n";
    return static_cast<int>(status);
  }
  if (status != SAMPAR_OK) return report(status);
  std::cout << summary << "\n";
  std::cout << "outputs in " << flags.out << "\n";
  return SAMPAR_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-parallel Bayesian neural network training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sampar_version()));

  Flags flags;
  const char* env_out = std::getenv("SAMPAR_OUT_DIR");
  flags.out = env_out && *env_out ? env_out : "results";

  std::string chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"train", "Train one configuration and write metrics, timings, manifest and model"},
      {"bench-fixed", "Time every strategy at fixed S over the configured worker counts"},
      {"bench-proportional", "Time sample-parallel runs with S growing in proportion to P"},
      {"verify", "Run the built-in correctness checks"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", flags.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", flags.overrides, "Override, section.key=value (repeatable)");
    sub->add_option("--out", flags.out, "Output directory (default $SAMPAR_OUT_DIR or ./results)");
    sub->add_option("--transport", flags.transport, "inproc or socket")->check(CLI::IsMember({"inproc", "socket"}));
    sub->add_option("--port", flags.port, "Rendezvous port for socket runs (0 picks one)")->check(CLI::Range(0, 65535));
    // Fault injection for tests.
    sub->add_option("--kill-rank", flags.kill_rank)->group("");
    sub->add_option("--kill-after-ms", flags.kill_after_ms)->group("");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : SAMPAR_ERR_CONFIG;
  }
  return run(chosen, flags);
}
