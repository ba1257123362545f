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

#include "flight/model.h"

#include "flight/grad_ops.h"

namespace flight {
namespace {

template <typename T>
void require_rgb(const ag::Var<T>& x, const char* block) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != 3) {
    throw ShapeError(std::string(block) + " expects an N x 3 x H x W image, got " +
                     shape_str(s));
  }
}

template <typename T>
ag::Var<T> conv(const ag::Var<T>& x, const ParamVars<T>& p,
                const std::string& prefix, std::int64_t stride = 1) {
  const ag::Var<T>& w = p[prefix + ".weight"];
  const Shape& ws = w.shape();
  ConvSpec spec = conv_spec(ws[0], ws[1], ws[2], stride);
  return ag::conv2d(x, w, p[prefix + ".bias"], spec);
}

template <typename T>
ag::Var<T> dense(const ag::Var<T>& x, const ParamVars<T>& p,
                 const std::string& prefix) {
  return ag::linear(x, p[prefix + ".weight"], p[prefix + ".bias"]);
}

}  // namespace

template <typename T>
ag::Var<T> ime_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                       const ModelConfig& cfg) {
  require_rgb(lli, "IME");
  const double a = cfg.celu_alpha;
  auto features = ag::celu(conv(lli, params, "sdia.ime.conv1"), a);
  features = ag::celu(conv(features, params, "sdia.ime.conv2"), a);
  auto local_gain = dense(ag::global_avg_pool(features), params, "sdia.ime.gain");
  auto map = conv(features, params, "sdia.ime.map");
  return ag::sigmoid(ag::broadcast_mul(map, local_gain));
}

template <typename T>
ag::Var<T> ge_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                      const ModelConfig& cfg) {
  require_rgb(lli, "GE");
  if (lli.shape()[2] < 7 || lli.shape()[3] < 7) {
    throw ShapeError("GE needs spatial extent >= 7, got " +
                     shape_str(lli.shape()));
  }
  auto x = ag::celu(conv(lli, params, "sdia.ge.conv1", 2), cfg.celu_alpha);
  x = ag::relu(conv(x, params, "sdia.ge.conv2", 2));
  return ag::softplus(dense(ag::global_avg_pool(x), params, "sdia.ge.fc"));
}

template <typename T>
ag::Var<T> sdia_combine(const ag::Var<T>& lli,
                        const ag::Var<T>& illumination_map,
                        const ag::Var<T>& gain) {
  return ag::broadcast_mul(ag::mul(lli, illumination_map), gain);
}

template <typename T>
ag::Var<T> sdia_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                        const ModelConfig& cfg) {
  return sdia_combine(lli, ime_forward(lli, params, cfg),
                      ge_forward(lli, params, cfg));
}

template <typename T>
ag::Var<T> eca_forward(const ag::Var<T>& x, const ParamVars<T>& params,
                       const ModelConfig& cfg) {
  if (x.shape().size() != 4 || x.shape()[1] != cfg.gisp_channels) {
    throw ShapeError("ECA expects " + std::to_string(cfg.gisp_channels) +
                     " channels, got " + shape_str(x.shape()));
  }
  auto descriptor = ag::add(ag::global_avg_pool(x), ag::global_max_pool(x));
  auto hidden = ag::relu(dense(descriptor, params, "gisp.eca.fc1"));
  auto weights = ag::sigmoid(dense(hidden, params, "gisp.eca.fc2"));
  return ag::broadcast_mul(x, weights);
}

template <typename T>
ag::Var<T> df_forward(const ag::Var<T>& x, const ParamVars<T>& params,
                      const ModelConfig& cfg, std::int64_t index) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] % 2 != 0) {
    throw ShapeError("DF expects an even channel count, got " + shape_str(s));
  }
  const std::string block = "gisp.df" + std::to_string(index);
  auto [a, b] = ag::channel_split(x, s[1] / 2);
  a = ag::relu(conv(a, params, block + ".conv_a"));
  b = ag::celu(conv(b, params, block + ".conv_b"), cfg.celu_alpha);
  auto fused = conv(ag::channel_concat(a, b), params, block + ".fuse");
  return ag::add(fused, x);
}

template <typename T>
ag::Var<T> gisp_forward(const ag::Var<T>& latent, const ParamVars<T>& params,
                        const ModelConfig& cfg) {
  require_rgb(latent, "GISP");
  auto h = ag::celu(conv(latent, params, "gisp.head.conv"), cfg.celu_alpha);
  h = eca_forward(h, params, cfg);
  for (std::int64_t i = 0; i < cfg.df_blocks; ++i) {
    h = df_forward(h, params, cfg, i);
  }
  return ag::sigmoid(conv(h, params, "gisp.tail.conv"));
}

template <typename T>
ag::Var<T> flight_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                          const ModelConfig& cfg) {
  return gisp_forward(sdia_forward(lli, params, cfg), params, cfg);
}

template <typename T>
ag::Var<T> model_forward(const ag::Var<T>& lli, const ParamVars<T>& params,
                         const ModelConfig& cfg, ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kSdiaOnly: return sdia_forward(lli, params, cfg);
    case ModelVariant::kGispOnly: return gisp_forward(lli, params, cfg);
    case ModelVariant::kFull: break;
  }
  return flight_forward(lli, params, cfg);
}

Tensor enhance(const ParamStore& params, const ModelConfig& cfg,
               ModelVariant variant, const Tensor& lli) {
  ag::Tape<float> tape(/*recording=*/false);
  ParamVars<float> vars = bind_params(tape, params);
  return model_forward(tape.constant(lli), vars, cfg, variant).value();
}

#define FLIGHT_INSTANTIATE_MODEL(T)                                            \
  template ag::Var<T> ime_forward<T>(const ag::Var<T>&, const ParamVars<T>&,   \
                                     const ModelConfig&);                      \
  template ag::Var<T> ge_forward<T>(const ag::Var<T>&, const ParamVars<T>&,    \
                                    const ModelConfig&);                       \
  template ag::Var<T> sdia_combine<T>(const ag::Var<T>&, const ag::Var<T>&,    \
                                      const ag::Var<T>&);                      \
  template ag::Var<T> sdia_forward<T>(const ag::Var<T>&, const ParamVars<T>&,  \
                                      const ModelConfig&);                     \
  template ag::Var<T> eca_forward<T>(const ag::Var<T>&, const ParamVars<T>&,   \
                                     const ModelConfig&);                      \
  template ag::Var<T> df_forward<T>(const ag::Var<T>&, const ParamVars<T>&,    \
                                    const ModelConfig&, std::int64_t);         \
  template ag::Var<T> gisp_forward<T>(const ag::Var<T>&, const ParamVars<T>&,  \
                                      const ModelConfig&);                     \
  template ag::Var<T> flight_forward<T>(const ag::Var<T>&,                     \
                                        const ParamVars<T>&,                   \
                                        const ModelConfig&);                   \
  template ag::Var<T> model_forward<T>(const ag::Var<T>&, const ParamVars<T>&, \
                                       const ModelConfig&, ModelVariant);

FLIGHT_INSTANTIATE_MODEL(float)
FLIGHT_INSTANTIATE_MODEL(double)

#undef FLIGHT_INSTANTIATE_MODEL

}  // namespace flight
