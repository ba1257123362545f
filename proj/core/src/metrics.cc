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

#include "flight/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flight {

double psnr(const Tensor& pred, const Tensor& target, double peak) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("psnr: shapes " + shape_str(pred.shape()) + " and " +
                     shape_str(target.shape()) + " differ");
  }
  double sse = 0.0;
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(pred.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr_capped(const Tensor& pred, const Tensor& target, double peak) {
  return std::min(psnr(pred, target, peak), kPsnrCap);
}

double ssim_index(const Tensor& pred, const Tensor& target,
                  const MsSsimSpec& spec) {
  ag::Tape<double> tape(/*recording=*/false);
  return ssim(tape.constant(pred.cast<double>()),
              tape.constant(target.cast<double>()), spec)
      .value()[0];
}

double ms_ssim_index(const Tensor& pred, const Tensor& target,
                     const MsSsimSpec& spec) {
  ag::Tape<double> tape(/*recording=*/false);
  return ms_ssim(tape.constant(pred.cast<double>()),
                 tape.constant(target.cast<double>()), spec)
      .value()[0];
}

Tensor quantize_8bit(const Tensor& t) {
  Tensor out(t.shape());
  for (std::int64_t i = 0; i < t.size(); ++i) {
    const double v = std::clamp(static_cast<double>(t[i]), 0.0, 1.0);
    out[i] = static_cast<float>(std::round(v * 255.0) / 255.0);
  }
  return out;
}

ImageScore score_image(const Tensor& pred, const Tensor& target,
                       bool quantize) {
  const Tensor scored = quantize ? quantize_8bit(pred) : pred;
  return {psnr_capped(scored, target), ssim_index(scored, target)};
}

}  // namespace flight
