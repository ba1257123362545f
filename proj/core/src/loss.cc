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

#include "flight/loss.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flight/grad_ops.h"

namespace flight {

void LossWeights::validate() const {
  if (alpha1 < 0.0 || alpha2 < 0.0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (!(alpha1 + alpha2 > 0.0)) {
    throw std::invalid_argument("at least one loss weight must be positive");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("smooth L1 beta must be positive");
}

void MsSsimSpec::validate() const {
  if (scales < 1 || scales > static_cast<int>(scale_weights.size())) {
    throw std::invalid_argument("MS-SSIM scales must be in 1..5");
  }
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("SSIM window must be a positive odd count");
  }
  if (!(sigma > 0.0) || !(data_range > 0.0)) {
    throw std::invalid_argument("SSIM sigma and data range must be positive");
  }
}

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(window));
  const double center = (window - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - center;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

int supported_scales(std::int64_t height, std::int64_t width,
                     const MsSsimSpec& spec) {
  spec.validate();
  const std::int64_t extent = std::min(height, width);
  if (extent < spec.window) {
    throw ShapeError("image extent " + std::to_string(extent) +
                     " is smaller than the SSIM window " +
                     std::to_string(spec.window));
  }
  int scales = 1;
  while (scales < spec.scales &&
         extent >= static_cast<std::int64_t>(spec.window) << scales) {
    ++scales;
  }
  return scales;
}

std::vector<double> scale_weights_for(int scales, const MsSsimSpec& spec) {
  std::vector<double> w(spec.scale_weights.begin(),
                        spec.scale_weights.begin() + scales);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

template <typename T>
ag::Var<T> smooth_l1(const ag::Var<T>& pred, const ag::Var<T>& target,
                     double beta) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("smooth_l1: prediction " + shape_str(pred.shape()) +
                     " and target " + shape_str(target.shape()) + " differ");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("smooth L1 beta must be positive");
  const auto p = pred.value().data();
  const auto t = target.value().data();
  const T b = static_cast<T>(beta);
  T acc = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T d = p[i] - t[i];
    const T ad = std::abs(d);
    acc += ad < b ? T(0.5) * d * d / b : ad - T(0.5) * b;
  }
  const T count = static_cast<T>(p.size());
  auto& tape = ag::tape_of<T>({&pred, &target});
  auto out = BasicTensor<T>::scalar(acc / count);
  if (!ag::needs_grad<T>({&pred, &target})) {
    return tape.record(std::move(out), false, {});
  }
  auto pn = pred.node(), tn = target.node();
  return tape.record(std::move(out), true,
                     [pn, tn, b, count](const BasicTensor<T>& gy) {
                       const T g = gy[0] / count;
                       const auto p = pn->value.data();
                       const auto t = tn->value.data();
                       BasicTensor<T>* gp = pn->requires_grad ? &pn->grad_buffer() : nullptr;
                       BasicTensor<T>* gt = tn->requires_grad ? &tn->grad_buffer() : nullptr;
                       for (std::size_t i = 0; i < p.size(); ++i) {
                         const T d = p[i] - t[i];
                         const T slope = std::abs(d) < b ? d / b
                                         : (d > T(0) ? T(1) : T(-1));
                         if (gp) (*gp)[i] += g * slope;
                         if (gt) (*gt)[i] -= g * slope;
                       }
                     });
}

namespace {

template <typename T>
struct ScaleStats {
  ag::Var<T> ssim;  // N x C mean of the full SSIM map
  ag::Var<T> cs;    // N x C mean of the contrast-structure map
};

template <typename T>
ScaleStats<T> scale_stats(const ag::Var<T>& x, const ag::Var<T>& y,
                          const std::vector<double>& taps,
                          const MsSsimSpec& spec) {
  const double c1 = std::pow(spec.k1 * spec.data_range, 2);
  const double c2 = std::pow(spec.k2 * spec.data_range, 2);
  auto filt = [&taps](const ag::Var<T>& v) {
    return ag::separable_filter_valid(v, std::span<const double>(taps));
  };
  auto mu_x = filt(x);
  auto mu_y = filt(y);
  auto mu_xx = ag::mul(mu_x, mu_x);
  auto mu_yy = ag::mul(mu_y, mu_y);
  auto mu_xy = ag::mul(mu_x, mu_y);
  auto var_x = ag::sub(filt(ag::mul(x, x)), mu_xx);
  auto var_y = ag::sub(filt(ag::mul(y, y)), mu_yy);
  auto cov = ag::sub(filt(ag::mul(x, y)), mu_xy);

  auto cs_map = ag::div(ag::add_scalar(ag::scale(cov, 2.0), c2),
                        ag::add_scalar(ag::add(var_x, var_y), c2));
  auto luminance = ag::div(ag::add_scalar(ag::scale(mu_xy, 2.0), c1),
                           ag::add_scalar(ag::add(mu_xx, mu_yy), c1));
  auto ssim_map = ag::mul(luminance, cs_map);
  return {ag::global_avg_pool(ssim_map), ag::global_avg_pool(cs_map)};
}

template <typename T>
void require_images(const ag::Var<T>& a, const ag::Var<T>& b, const char* op) {
  if (a.shape() != b.shape() || a.shape().size() != 4) {
    throw ShapeError(std::string(op) + " needs equal NCHW shapes, got " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
}

// Keeps pow() well defined when a contrast term is non-positive.
constexpr double kMsSsimFloor = 1e-6;

}  // namespace

template <typename T>
ag::Var<T> ssim(const ag::Var<T>& pred, const ag::Var<T>& target,
                const MsSsimSpec& spec) {
  require_images(pred, target, "ssim");
  supported_scales(pred.shape()[2], pred.shape()[3], spec);
  const auto taps = gaussian_taps(spec.window, spec.sigma);
  return ag::mean(scale_stats(pred, target, taps, spec).ssim);
}

template <typename T>
ag::Var<T> ms_ssim(const ag::Var<T>& pred, const ag::Var<T>& target,
                   const MsSsimSpec& spec) {
  require_images(pred, target, "ms_ssim");
  const int scales = supported_scales(pred.shape()[2], pred.shape()[3], spec);
  const auto weights = scale_weights_for(scales, spec);
  const auto taps = gaussian_taps(spec.window, spec.sigma);

  ag::Var<T> x = pred, y = target;
  ag::Var<T> product;
  for (int s = 0; s < scales; ++s) {
    ScaleStats<T> stats = scale_stats(x, y, taps, spec);
    const bool coarsest = s == scales - 1;
    auto factor = ag::pow_floor(coarsest ? stats.ssim : stats.cs, weights[s],
                                kMsSsimFloor);
    product = product.defined() ? ag::mul(product, factor) : factor;
    if (!coarsest) {
      x = ag::avg_pool2(x);
      y = ag::avg_pool2(y);
    }
  }
  return ag::mean(product);
}

template <typename T>
ag::Var<T> total_loss(const ag::Var<T>& pred, const ag::Var<T>& target,
                      const LossWeights& weights, const MsSsimSpec& spec) {
  weights.validate();
  ag::Var<T> total;
  if (weights.alpha1 > 0.0) {
    total = ag::scale(smooth_l1(pred, target, weights.beta), weights.alpha1);
  }
  if (weights.alpha2 > 0.0) {
    // alpha2 * (1 - ms_ssim)
    auto term = ag::add_scalar(
        ag::scale(ms_ssim(pred, target, spec), -weights.alpha2), weights.alpha2);
    total = total.defined() ? ag::add(total, term) : term;
  }
  return total;
}

#define FLIGHT_INSTANTIATE_LOSS(T)                                             \
  template ag::Var<T> smooth_l1<T>(const ag::Var<T>&, const ag::Var<T>&,       \
                                   double);                                    \
  template ag::Var<T> ssim<T>(const ag::Var<T>&, const ag::Var<T>&,            \
                              const MsSsimSpec&);                              \
  template ag::Var<T> ms_ssim<T>(const ag::Var<T>&, const ag::Var<T>&,         \
                                 const MsSsimSpec&);                           \
  template ag::Var<T> total_loss<T>(const ag::Var<T>&, const ag::Var<T>&,      \
                                    const LossWeights&, const MsSsimSpec&);

FLIGHT_INSTANTIATE_LOSS(float)
FLIGHT_INSTANTIATE_LOSS(double)

#undef FLIGHT_INSTANTIATE_LOSS

}  // namespace flight
