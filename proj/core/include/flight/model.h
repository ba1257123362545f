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

#ifndef FLIGHT_MODEL_H_
#define FLIGHT_MODEL_H_

// Two-stage low-light enhancement network.
//
//   latent = lli * IME(lli) * GE(lli)        scene-dependent adjustment
//   output = GISP(latent)                    global colour/denoise stage
//
// IME yields a per-pixel map in (0, 1); GE a positive gain per image. GISP is
// a 7x7 head, extended channel attention, a stack of dual-path blocks and a
// sigmoid output layer.

#include "flight/autograd.h"
#include "flight/params.h"
#include "flight/tensor.h"

namespace flight {

template <typename T>
ag::Var<T> ime_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                       const ModelConfig& cfg);

// N x 1 gain, strictly positive.
template <typename T>
ag::Var<T> ge_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                      const ModelConfig& cfg);

// lli * illumination_map * broadcast(gain); no clamping.
template <typename T>
ag::Var<T> sdia_combine(const ag::Var<T>& lli, const ag::Var<T>& illumination_map,
                        const ag::Var<T>& gain);

template <typename T>
ag::Var<T> sdia_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                        const ModelConfig& cfg);

template <typename T>
ag::Var<T> eca_forward(const ag::Var<T>& x, const ParamVars<T>& params,
                       const ModelConfig& cfg);

// Dual-path block `index` of the GISP stack.
template <typename T>
ag::Var<T> df_forward(const ag::Var<T>& x, const ParamVars<T>& params,
                      const ModelConfig& cfg, std::int64_t index);

template <typename T>
ag::Var<T> gisp_forward(const ag::Var<T>& latent, const ParamVars<T>& params,
                        const ModelConfig& cfg);

template <typename T>
ag::Var<T> flight_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                          const ModelConfig& cfg);

// Dispatches on the ablation variant: full network, SDIA alone (its latent is
// the output) or GISP applied directly to the input.
template <typename T>
ag::Var<T> model_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                         const ModelConfig& cfg, ModelVariant variant);

// Inference without gradient bookkeeping.
Tensor enhance(const ParamStore& params, const ModelConfig& cfg,
               ModelVariant variant, const Tensor& lli);

}  // namespace flight

#endif  // FLIGHT_MODEL_H_
