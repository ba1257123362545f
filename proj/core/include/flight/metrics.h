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

#ifndef FLIGHT_METRICS_H_
#define FLIGHT_METRICS_H_

#include "flight/loss.h"
#include "flight/tensor.h"

namespace flight {

// Value written in tables when prediction and reference are identical.
inline constexpr double kPsnrCap = 100.0;

// 10 * log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const Tensor& pred, const Tensor& target, double peak = 1.0);

// psnr() clamped to kPsnrCap, for tabular output.
double psnr_capped(const Tensor& pred, const Tensor& target, double peak = 1.0);

// Single-scale SSIM evaluated in double precision.
double ssim_index(const Tensor& pred, const Tensor& target,
                  const MsSsimSpec& spec = {});

double ms_ssim_index(const Tensor& pred, const Tensor& target,
                     const MsSsimSpec& spec = {});

// Clamp to [0, 1], round half away from zero to 8 bits and map back to
// [0, 1]. Evaluation tables are computed on quantised predictions.
Tensor quantize_8bit(const Tensor& t);

struct ImageScore {
  double psnr = 0.0;  // capped at kPsnrCap
  double ssim = 0.0;
};

// Scores a prediction against its reference. With `quantize` the prediction
// is first passed through quantize_8bit.
ImageScore score_image(const Tensor& pred, const Tensor& target,
                       bool quantize = true);

}  // namespace flight

#endif  // FLIGHT_METRICS_H_
