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

#include "flight/checkpoint.h"

#include <map>

#include "flight/weight_file.h"

namespace flight {
namespace {

constexpr const char* kFirstMomentPrefix = "optstate.m.";
constexpr const char* kSecondMomentPrefix = "optstate.v.";

}  // namespace

void save_checkpoint(const TrainState& state, const ModelConfig& cfg,
                     ModelVariant variant, const std::filesystem::path& path) {
  std::vector<NamedTensor> entries;
  entries.push_back(encode_model_config(cfg, variant));
  for (const auto& e : state.params.entries()) entries.push_back({e.name, e.value});
  for (const auto& e : state.opt.m.entries()) {
    entries.push_back({kFirstMomentPrefix + e.name, e.value});
  }
  for (const auto& e : state.opt.v.entries()) {
    entries.push_back({kSecondMomentPrefix + e.name, e.value});
  }
  entries.push_back({"meta.step", encode_counter(state.opt.step)});
  entries.push_back({"meta.epoch", encode_counter(state.epoch)});
  write_container(entries, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto entries = read_container(path);
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.value;
  auto require = [&](const std::string& name) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw FormatError(path.string() + ": checkpoint lacks '" + name + "'");
    }
    return *it->second;
  };

  Checkpoint out;
  std::tie(out.config, out.variant) =
      decode_model_config(require("meta.model_config"));
  out.state.params = params_from_entries(entries, out.config, out.variant);

  std::vector<NamedTensor> m, v;
  for (const auto& e : out.state.params.entries()) {
    m.push_back({e.name, require(kFirstMomentPrefix + e.name)});
    v.push_back({e.name, require(kSecondMomentPrefix + e.name)});
  }
  out.state.opt.m = params_from_entries(m, out.config, out.variant);
  out.state.opt.v = params_from_entries(v, out.config, out.variant);
  out.state.opt.step = decode_counter(require("meta.step"));
  out.state.epoch = decode_counter(require("meta.epoch"));
  return out;
}

}  // namespace flight
