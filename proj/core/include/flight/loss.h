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

#ifndef FLIGHT_LOSS_H_
#define FLIGHT_LOSS_H_

#include <array>
#include <vector>

#include "flight/autograd.h"
#include "flight/tensor.h"

namespace flight {

// total = alpha1 * smooth_l1 + alpha2 * (1 - ms_ssim)
struct LossWeights {
  double alpha1 = 1.0;
  double alpha2 = 0.2;
  double beta = 1.0;  // smooth L1 transition point

  void validate() const;
};

struct MsSsimSpec {
  int scales = 5;
  std::array<double, 5> scale_weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;

  void validate() const;
};

// Normalised 1-D Gaussian taps of length `window`.
std::vector<double> gaussian_taps(int window, double sigma);

// Number of scales an H x W image supports: the largest s <= spec.scales
// with min(H, W) >= window * 2^(s-1). Throws when even one scale does not fit.
int supported_scales(std::int64_t height, std::int64_t width,
                     const MsSsimSpec& spec);

// Weights of the first `scales` levels, renormalised to sum to one.
std::vector<double> scale_weights_for(int scales, const MsSsimSpec& spec);

template <typename T>
ag::Var<T> smooth_l1(const ag::Var<T>& pred, const ag::Var<T>& target,
                     double beta);

// Mean Gaussian-window SSIM over pixels and channels (valid filtering).
template <typename T>
ag::Var<T> ssim(const ag::Var<T>& pred, const ag::Var<T>& target,
                const MsSsimSpec& spec = {});

// Multi-scale SSIM; drops the coarsest scales when the image is too small.
template <typename T>
ag::Var<T> ms_ssim(const ag::Var<T>& pred, const ag::Var<T>& target,
                   const MsSsimSpec& spec = {});

template <typename T>
ag::Var<T> total_loss(const ag::Var<T>& pred, const ag::Var<T>& target,
                      const LossWeights& weights, const MsSsimSpec& spec = {});

}  // namespace flight

#endif  // FLIGHT_LOSS_H_
