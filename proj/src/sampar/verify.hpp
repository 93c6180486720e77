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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sampar/config.hpp"
#include "sampar/data.hpp"

namespace sampar {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Oracle suite: gradient and KL checks on small fixed models, then
// sequential-vs-parallel equivalence runs on the configured model and data.
// Parallel runs use threads and at most 4 workers.
std::vector<CheckResult> run_verify(const ExperimentConfig& cfg, const SplitDataset& data);

void write_verify_csv(const std::filesystem::path& path, const std::vector<CheckResult>& checks);

// Largest |a - b| / max|b| over the vectors (0 when b is all zero and a == b).
double max_relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace sampar
