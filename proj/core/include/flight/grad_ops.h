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

#ifndef FLIGHT_GRAD_OPS_H_
#define FLIGHT_GRAD_OPS_H_

// Differentiable counterparts of the tensor kernels plus the elementwise and
// reduction ops the losses are assembled from. Forward values are identical
// to the eager functions in tensor.h.

#include <span>
#include <utility>

#include "flight/autograd.h"
#include "flight/tensor.h"

namespace flight::ag {

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const ConvSpec& spec);
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T>
Var<T> activation(const Var<T>& x, Activation kind, double alpha = 1.0);
template <typename T>
Var<T> relu(const Var<T>& x) { return activation(x, Activation::kRelu); }
template <typename T>
Var<T> celu(const Var<T>& x, double alpha) {
  return activation(x, Activation::kCelu, alpha);
}
template <typename T>
Var<T> sigmoid(const Var<T>& x) { return activation(x, Activation::kSigmoid); }
template <typename T>
Var<T> softplus(const Var<T>& x) { return activation(x, Activation::kSoftplus); }

template <typename T>
Var<T> global_avg_pool(const Var<T>& x);
template <typename T>
Var<T> global_max_pool(const Var<T>& x);

template <typename T>
std::pair<Var<T>, Var<T>> channel_split(const Var<T>& x, std::int64_t at);
template <typename T>
Var<T> channel_concat(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> broadcast_mul(const Var<T>& x, const Var<T>& s);

// Same-shape elementwise arithmetic.
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& x, double factor);
template <typename T>
Var<T> add_scalar(const Var<T>& x, double offset);
// max(x, floor)^exponent; the gradient is zero where x < floor.
template <typename T>
Var<T> pow_floor(const Var<T>& x, double exponent, double floor);

// Reductions to a single-element tensor of shape (1).
template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> mean(const Var<T>& x);

template <typename T>
Var<T> separable_filter_valid(const Var<T>& x, std::span<const double> taps);
template <typename T>
Var<T> avg_pool2(const Var<T>& x);

}  // namespace flight::ag

#endif  // FLIGHT_GRAD_OPS_H_
