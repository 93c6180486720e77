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

#include "sampar/config.hpp"
#include "sampar/launcher.hpp"

namespace sampar {

// Builds the train/validation split described by cfg.data and fills in the
// data-dependent fields left at 0: model.input_dim, model.output_dim and,
// for the images task, augment.image_side. Validates the result.
SplitDataset prepare_experiment(ExperimentConfig& cfg);

LaunchOptions launch_options(const ExperimentConfig& cfg);

}  // namespace sampar
