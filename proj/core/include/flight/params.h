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

#ifndef FLIGHT_PARAMS_H_
#define FLIGHT_PARAMS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flight/autograd.h"
#include "flight/tensor.h"

namespace flight {

// Architecture hyperparameters. Defaults give 24,296 trainable parameters.
struct ModelConfig {
  std::int64_t ime_channels = 8;
  std::int64_t ge_channels = 8;
  std::int64_t gisp_channels = 24;
  std::int64_t df_blocks = 3;
  std::int64_t eca_reduction = 4;
  double celu_alpha = 1.0;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Which stages exist. sdia_only and gisp_only are the ablation networks.
enum class ModelVariant { kFull, kSdiaOnly, kGispOnly };

const char* variant_name(ModelVariant variant);
// Accepts "full", "sdia_only"/"sdia", "gisp_only"/"gisp".
ModelVariant parse_variant(std::string_view text);

struct ParamSpec {
  std::string name;   // e.g. "sdia.ime.conv1.weight"
  std::string block;  // reporting group, e.g. "sdia.ime"
  Shape shape;
  std::int64_t fan_in = 0;
  bool is_bias = false;
};

// Every trainable tensor of the variant, in definition order.
std::vector<ParamSpec> param_layout(const ModelConfig& cfg,
                                    ModelVariant variant = ModelVariant::kFull);

// Named trainable tensors, each with a same-shaped gradient buffer.
// Iteration order is insertion (definition) order.
template <typename T>
class BasicParamStore {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> value;
    BasicTensor<T> grad;
  };

  void add(std::string name, BasicTensor<T> value);
  bool contains(const std::string& name) const;
  const BasicTensor<T>& value(const std::string& name) const;
  BasicTensor<T>& value(const std::string& name);
  BasicTensor<T>& grad(const std::string& name);

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  void zero_grad();

  template <typename U>
  BasicParamStore<U> cast() const {
    BasicParamStore<U> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

 private:
  const Entry& find(const std::string& name) const;

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

using ParamStore = BasicParamStore<float>;

// Uniform(-b, b) weights with b = sqrt(6 / fan_in), zero biases.
ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed,
                       ModelVariant variant = ModelVariant::kFull);

template <typename T>
std::int64_t param_count(const BasicParamStore<T>& params);

// Parameter tensors bound into a tape for one forward pass.
template <typename T>
class ParamVars {
 public:
  void set(const std::string& name, ag::Var<T> var);
  const ag::Var<T>& operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.count(name) > 0; }

 private:
  std::map<std::string, ag::Var<T>> vars_;
};

// With track_grad, gradients flow into each entry's grad buffer on backward.
template <typename T>
ParamVars<T> bind_params(ag::Tape<T>& tape, BasicParamStore<T>& params,
                         bool track_grad);
template <typename T>
ParamVars<T> bind_params(ag::Tape<T>& tape, const BasicParamStore<T>& params);

}  // namespace flight

#endif  // FLIGHT_PARAMS_H_
