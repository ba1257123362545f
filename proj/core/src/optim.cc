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

#include "flight/optim.h"

#include <cmath>

namespace flight {

bool OptState::operator==(const OptState& other) const {
  if (step != other.step || m.size() != other.m.size() ||
      v.size() != other.v.size()) {
    return false;
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.entries()[i].name != other.m.entries()[i].name ||
        m.entries()[i].value != other.m.entries()[i].value ||
        v.entries()[i].value != other.v.entries()[i].value) {
      return false;
    }
  }
  return true;
}

OptState init_opt_state(const ParamStore& params) {
  OptState state;
  for (const auto& e : params.entries()) {
    state.m.add(e.name, Tensor(e.value.shape()));
    state.v.add(e.name, Tensor(e.value.shape()));
  }
  return state;
}

void adamw_step(ParamStore& params, OptState& state, double lr,
                const AdamWConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("optimizer state does not match parameters");
  }
  for (const auto& e : params.entries()) {
    if (e.grad.shape() != e.value.shape()) {
      throw std::invalid_argument("gradient buffer of '" + e.name +
                                  "' has the wrong shape");
    }
    for (float g : e.grad.data()) {
      if (!std::isfinite(g)) {
        throw NonFiniteError("non-finite gradient in parameter '" + e.name + "'");
      }
    }
  }

  const std::int64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const double decay = 1.0 - lr * cfg.weight_decay;

  auto& entries = params.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& p = entries[i];
    auto& m = state.m.entries()[i];
    auto& v = state.v.entries()[i];
    if (m.name != p.name || m.value.shape() != p.value.shape()) {
      throw std::invalid_argument("optimizer state entry '" + m.name +
                                  "' does not match parameter '" + p.name + "'");
    }
    for (std::int64_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      const double mk = cfg.beta1 * m.value[k] + (1.0 - cfg.beta1) * g;
      const double vk = cfg.beta2 * v.value[k] + (1.0 - cfg.beta2) * g * g;
      m.value[k] = static_cast<float>(mk);
      v.value[k] = static_cast<float>(vk);
      const double m_hat = mk / bc1;
      const double v_hat = vk / bc2;
      const double theta = static_cast<double>(p.value[k]) * decay;
      p.value[k] =
          static_cast<float>(theta - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
  state.step = t;
}

}  // namespace flight
