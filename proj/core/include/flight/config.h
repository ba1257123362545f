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

#ifndef FLIGHT_CONFIG_H_
#define FLIGHT_CONFIG_H_

// Flat `key = value` run configuration. Blank lines and text after '#' are
// ignored; every key must belong to the schema below.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flight/params.h"
#include "flight/trainer.h"

namespace flight {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// Known keys, in the order to_config_text writes them.
const std::vector<std::string>& config_keys();

// Sets one key. Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

// `source` prefixes diagnostics, which also carry the line number.
void apply_config_text(RunConfig& cfg, std::string_view text,
                       std::string_view source = "<config>");
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// FLIGHT_SEED, when set, replaces train.seed.
void apply_environment(RunConfig& cfg);

// Validates model and training sections, rethrowing as ConfigError.
void validate(const RunConfig& cfg);

std::string to_config_text(const RunConfig& cfg);

}  // namespace flight

#endif  // FLIGHT_CONFIG_H_
