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

#include "flight/params.h"

#include <cmath>
#include <stdexcept>

#include "flight/random.h"

namespace flight {

void ModelConfig::validate() const {
  auto positive = [](std::int64_t v, const char* name) {
    if (v <= 0) {
      throw std::invalid_argument(std::string(name) + " must be positive, got " +
                                  std::to_string(v));
    }
  };
  positive(ime_channels, "ime_channels");
  positive(ge_channels, "ge_channels");
  positive(gisp_channels, "gisp_channels");
  positive(df_blocks, "df_blocks");
  positive(eca_reduction, "eca_reduction");
  if (!(celu_alpha > 0.0)) {
    throw std::invalid_argument("celu_alpha must be positive");
  }
  if (gisp_channels % 2 != 0) {
    throw std::invalid_argument("gisp_channels must be even, got " +
                                std::to_string(gisp_channels));
  }
  if (gisp_channels % eca_reduction != 0) {
    throw std::invalid_argument("eca_reduction " + std::to_string(eca_reduction) +
                                " does not divide gisp_channels " +
                                std::to_string(gisp_channels));
  }
}

const char* variant_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kFull: return "full";
    case ModelVariant::kSdiaOnly: return "sdia_only";
    case ModelVariant::kGispOnly: return "gisp_only";
  }
  return "full";
}

ModelVariant parse_variant(std::string_view text) {
  if (text == "full") return ModelVariant::kFull;
  if (text == "sdia_only" || text == "sdia") return ModelVariant::kSdiaOnly;
  if (text == "gisp_only" || text == "gisp") return ModelVariant::kGispOnly;
  throw std::invalid_argument("unknown ablation mode '" + std::string(text) +
                              "' (expected full, sdia or gisp)");
}

namespace {

void add_conv(std::vector<ParamSpec>& out, const std::string& block,
              const std::string& name, std::int64_t out_ch, std::int64_t in_ch,
              std::int64_t k) {
  const std::int64_t fan_in = in_ch * k * k;
  out.push_back({block + "." + name + ".weight", block, {out_ch, in_ch, k, k},
                 fan_in, false});
  out.push_back({block + "." + name + ".bias", block, {out_ch}, fan_in, true});
}

void add_linear(std::vector<ParamSpec>& out, const std::string& block,
                const std::string& name, std::int64_t out_f, std::int64_t in_f) {
  out.push_back({block + "." + name + ".weight", block, {out_f, in_f}, in_f,
                 false});
  out.push_back({block + "." + name + ".bias", block, {out_f}, in_f, true});
}

}  // namespace

std::vector<ParamSpec> param_layout(const ModelConfig& cfg,
                                    ModelVariant variant) {
  cfg.validate();
  std::vector<ParamSpec> out;
  if (variant != ModelVariant::kGispOnly) {
    const std::int64_t c = cfg.ime_channels;
    add_conv(out, "sdia.ime", "conv1", c, 3, 5);
    add_conv(out, "sdia.ime", "conv2", c, c, 3);
    add_linear(out, "sdia.ime", "gain", 3, c);
    add_conv(out, "sdia.ime", "map", 3, c, 3);
    const std::int64_t g = cfg.ge_channels;
    add_conv(out, "sdia.ge", "conv1", g, 3, 7);
    add_conv(out, "sdia.ge", "conv2", g, g, 3);
    add_linear(out, "sdia.ge", "fc", 1, g);
  }
  if (variant != ModelVariant::kSdiaOnly) {
    const std::int64_t c = cfg.gisp_channels;
    const std::int64_t half = c / 2;
    add_conv(out, "gisp.head", "conv", c, 3, 7);
    add_linear(out, "gisp.eca", "fc1", c / cfg.eca_reduction, c);
    add_linear(out, "gisp.eca", "fc2", c, c / cfg.eca_reduction);
    for (std::int64_t i = 0; i < cfg.df_blocks; ++i) {
      const std::string block = "gisp.df" + std::to_string(i);
      add_conv(out, block, "conv_a", half, half, 3);
      add_conv(out, block, "conv_b", half, half, 5);
      add_conv(out, block, "fuse", c, c, 1);
    }
    add_conv(out, "gisp.tail", "conv", 3, c, 3);
  }
  return out;
}

template <typename T>
void BasicParamStore<T>::add(std::string name, BasicTensor<T> value) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  BasicTensor<T> grad(value.shape());
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
}

template <typename T>
bool BasicParamStore<T>::contains(const std::string& name) const {
  return index_.count(name) > 0;
}

template <typename T>
const typename BasicParamStore<T>::Entry& BasicParamStore<T>::find(
    const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("no parameter named '" + name + "'");
  }
  return entries_[it->second];
}

template <typename T>
const BasicTensor<T>& BasicParamStore<T>::value(const std::string& name) const {
  return find(name).value;
}

template <typename T>
BasicTensor<T>& BasicParamStore<T>::value(const std::string& name) {
  return const_cast<Entry&>(find(name)).value;
}

template <typename T>
BasicTensor<T>& BasicParamStore<T>::grad(const std::string& name) {
  return const_cast<Entry&>(find(name)).grad;
}

template <typename T>
void BasicParamStore<T>::zero_grad() {
  for (auto& e : entries_) e.grad.fill(T(0));
}

ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed,
                       ModelVariant variant) {
  Rng rng = make_rng(seed, /*stream=*/0x1417);
  ParamStore store;
  for (const auto& spec : param_layout(cfg, variant)) {
    Tensor value(spec.shape);
    if (!spec.is_bias) {
      const double bound = std::sqrt(6.0 / static_cast<double>(spec.fan_in));
      for (float& v : value.data()) {
        v = static_cast<float>(uniform(rng, -bound, bound));
      }
    }
    store.add(spec.name, std::move(value));
  }
  return store;
}

template <typename T>
std::int64_t param_count(const BasicParamStore<T>& params) {
  std::int64_t total = 0;
  for (const auto& e : params.entries()) total += e.value.size();
  return total;
}

template <typename T>
void ParamVars<T>::set(const std::string& name, ag::Var<T> var) {
  vars_[name] = std::move(var);
}

template <typename T>
const ag::Var<T>& ParamVars<T>::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) {
    throw std::out_of_range("parameter '" + name + "' is not bound");
  }
  return it->second;
}

template <typename T>
ParamVars<T> bind_params(ag::Tape<T>& tape, BasicParamStore<T>& params,
                         bool track_grad) {
  ParamVars<T> vars;
  for (auto& e : params.entries()) {
    vars.set(e.name, track_grad ? tape.parameter(e.value, &e.grad)
                                : tape.constant(e.value));
  }
  return vars;
}

template <typename T>
ParamVars<T> bind_params(ag::Tape<T>& tape, const BasicParamStore<T>& params) {
  ParamVars<T> vars;
  for (const auto& e : params.entries()) vars.set(e.name, tape.constant(e.value));
  return vars;
}

template class BasicParamStore<float>;
template class BasicParamStore<double>;
template class ParamVars<float>;
template class ParamVars<double>;
template std::int64_t param_count<float>(const BasicParamStore<float>&);
template std::int64_t param_count<double>(const BasicParamStore<double>&);
template ParamVars<float> bind_params<float>(ag::Tape<float>&,
                                             BasicParamStore<float>&, bool);
template ParamVars<double> bind_params<double>(ag::Tape<double>&,
                                               BasicParamStore<double>&, bool);
template ParamVars<float> bind_params<float>(ag::Tape<float>&,
                                             const BasicParamStore<float>&);
template ParamVars<double> bind_params<double>(ag::Tape<double>&,
                                               const BasicParamStore<double>&);

}  // namespace flight
