/* Copyright 2026 The FLIGHT-Net Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FLIGHT_CHECKPOINT_H_
#define FLIGHT_CHECKPOINT_H_

// Training checkpoints reuse the weight-file container. Besides the model
// config and parameters they hold "optstate.m.<name>", "optstate.v.<name>",
// "meta.step" and "meta.epoch".

#include <filesystem>

#include "flight/params.h"
#include "flight/trainer.h"

namespace flight {

struct Checkpoint {
  TrainState state;
  ModelConfig config;
  ModelVariant variant = ModelVariant::kFull;
};

void save_checkpoint(const TrainState& state, const ModelConfig& cfg,
                     ModelVariant variant, const std::filesystem::path& path);

// The whole file is validated before anything is returned.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace flight

#endif  // FLIGHT_CHECKPOINT_H_
