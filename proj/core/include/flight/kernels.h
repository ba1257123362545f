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

#ifndef FLIGHT_KERNELS_H_
#define FLIGHT_KERNELS_H_

// Raw forward/backward numerical kernels shared by the eager tensor API and
// the autograd rules. Backward kernels accumulate (+=) into pre-sized
// outputs; a null output pointer skips that gradient.

#include <cstdint>
#include <span>

#include "flight/tensor.h"

namespace flight::kernels {

template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                    const BasicTensor<T>* b, const ConvSpec& spec,
                    BasicTensor<T>& y);

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                     const ConvSpec& spec, const BasicTensor<T>& dy,
                     BasicTensor<T>* dx, BasicTensor<T>* dw,
                     BasicTensor<T>* db);

template <typename T>
void linear_forward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                    const BasicTensor<T>* b, BasicTensor<T>& y);

template <typename T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                     const BasicTensor<T>& dy, BasicTensor<T>* dx,
                     BasicTensor<T>* dw, BasicTensor<T>* db);

template <typename T>
void activation_forward(std::span<const T> x, Activation kind, double alpha,
                        std::span<T> y);

// dx += dy * f'(x). y is the forward output (used by sigmoid).
template <typename T>
void activation_backward(std::span<const T> x, std::span<const T> y,
                         Activation kind, double alpha, std::span<const T> dy,
                         std::span<T> dx);

template <typename T>
void global_avg_pool_backward(const BasicTensor<T>& dy, BasicTensor<T>& dx);

// Routes each (n, c) gradient to the first spatial maximum.
template <typename T>
void global_max_pool_backward(const BasicTensor<T>& x,
                              const BasicTensor<T>& dy, BasicTensor<T>& dx);

template <typename T>
void broadcast_mul_backward(const BasicTensor<T>& x, const BasicTensor<T>& s,
                            const BasicTensor<T>& dy, BasicTensor<T>* dx,
                            BasicTensor<T>* ds);

// Separable "valid" filtering of every (n, c) plane with the same 1-D taps
// along both axes. Output extent is H - k + 1 by W - k + 1.
template <typename T>
BasicTensor<T> separable_filter_valid(const BasicTensor<T>& x,
                                      std::span<const double> taps);

template <typename T>
void separable_filter_valid_backward(const BasicTensor<T>& dy,
                                     std::span<const double> taps,
                                     BasicTensor<T>& dx);

// 2x2 average pooling with stride 2; a trailing odd row/column is dropped.
template <typename T>
BasicTensor<T> avg_pool2(const BasicTensor<T>& x);

template <typename T>
void avg_pool2_backward(const BasicTensor<T>& dy, BasicTensor<T>& dx);

}  // namespace flight::kernels

#endif  // FLIGHT_KERNELS_H_
