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

#include "flight/tensor.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "flight/kernels.h"

namespace flight {

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ')';
  return out.str();
}

std::int64_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ShapeError("tensor rank must be 1..4, got shape " + shape_str(shape));
  }
  for (auto extent : shape) {
    if (extent <= 0) {
      throw ShapeError("tensor extents must be positive, got shape " +
                       shape_str(shape));
    }
  }
}

template <typename T>
void require_rank(const BasicTensor<T>& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + " must have rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_str(t.shape()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " +
                     shape_str(shape));
  }
  return BasicTensor(std::move(shape), data_);
}

std::int64_t ConvSpec::output_extent(std::int64_t input_extent) const {
  const std::int64_t span = input_extent + 2 * padding - kernel_h;
  if (span < 0) {
    throw ShapeError("convolution kernel " + std::to_string(kernel_h) +
                     " exceeds padded input extent " +
                     std::to_string(input_extent + 2 * padding));
  }
  return span / stride + 1;
}

ConvSpec conv_spec(std::int64_t out_channels, std::int64_t in_channels,
                   std::int64_t kernel, std::int64_t stride,
                   std::int64_t padding) {
  ConvSpec spec;
  spec.out_channels = out_channels;
  spec.in_channels = in_channels;
  spec.kernel_h = kernel;
  spec.kernel_w = kernel;
  spec.stride = stride;
  spec.padding = padding < 0 ? (kernel - 1) / 2 : padding;
  return spec;
}

const char* activation_name(Activation kind) {
  switch (kind) {
    case Activation::kRelu: return "relu";
    case Activation::kCelu: return "celu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftplus: return "softplus";
  }
  return "unknown";
}

namespace {

Shape conv_output_shape(const Shape& input, const Shape& weight,
                        const Shape& bias, const ConvSpec& spec) {
  if (spec.out_channels <= 0 || spec.in_channels <= 0 || spec.kernel_h <= 0 ||
      spec.kernel_w <= 0 || spec.stride <= 0 || spec.padding < 0) {
    throw ShapeError("invalid convolution geometry");
  }
  if (input.size() != 4) {
    throw ShapeError("conv2d input must be NCHW, got " + shape_str(input));
  }
  if (weight != spec.weight_shape()) {
    throw ShapeError("conv2d weight shape " + shape_str(weight) +
                     " does not match spec " + shape_str(spec.weight_shape()));
  }
  if (input[1] != spec.in_channels) {
    throw ShapeError("conv2d input " + shape_str(input) +
                     " channel count does not match weight " +
                     shape_str(weight));
  }
  if (!bias.empty() && bias != spec.bias_shape()) {
    throw ShapeError("conv2d bias shape " + shape_str(bias) +
                     " does not match weight " + shape_str(weight));
  }
  ConvSpec along_w = spec;
  along_w.kernel_h = spec.kernel_w;
  return {input[0], spec.out_channels, spec.output_extent(input[2]),
          along_w.output_extent(input[3])};
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, const ConvSpec& spec) {
  BasicTensor<T> out(
      conv_output_shape(input.shape(), weight.shape(), bias.shape(), spec));
  kernels::conv2d_forward(input, weight, bias.empty() ? nullptr : &bias, spec,
                          out);
  return out;
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  require_rank(input, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  if (input.dim(1) != weight.dim(1)) {
    throw ShapeError("linear input " + shape_str(input.shape()) +
                     " inner extent does not match weight " +
                     shape_str(weight.shape()));
  }
  if (!bias.empty() && bias.shape() != Shape{weight.dim(0)}) {
    throw ShapeError("linear bias " + shape_str(bias.shape()) +
                     " does not match weight " + shape_str(weight.shape()));
  }
  BasicTensor<T> out({input.dim(0), weight.dim(0)});
  kernels::linear_forward(input, weight, bias.empty() ? nullptr : &bias, out);
  return out;
}

template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& x, Activation kind,
                          double alpha) {
  if (kind == Activation::kCelu && !(alpha > 0.0)) {
    throw std::invalid_argument("celu alpha must be positive");
  }
  BasicTensor<T> out(x.shape());
  kernels::activation_forward<T>(x.data(), kind, alpha, out.data());
  return out;
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x) {
  require_rank(x, 4, "global_avg_pool input");
  const std::int64_t area = x.dim(2) * x.dim(3);
  BasicTensor<T> out({x.dim(0), x.dim(1)});
  for (std::int64_t p = 0; p < out.size(); ++p) {
    const T* src = x.raw() + p * area;
    T acc = T(0);
    for (std::int64_t i = 0; i < area; ++i) acc += src[i];
    out[p] = acc / static_cast<T>(area);
  }
  return out;
}

template <typename T>
BasicTensor<T> global_max_pool(const BasicTensor<T>& x) {
  require_rank(x, 4, "global_max_pool input");
  const std::int64_t area = x.dim(2) * x.dim(3);
  BasicTensor<T> out({x.dim(0), x.dim(1)});
  for (std::int64_t p = 0; p < out.size(); ++p) {
    const T* src = x.raw() + p * area;
    out[p] = *std::max_element(src, src + area);
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_split(const BasicTensor<T>& x,
                                                        std::int64_t at) {
  require_rank(x, 4, "channel_split input");
  const std::int64_t channels = x.dim(1);
  if (at <= 0 || at >= channels) {
    throw ShapeError("channel_split point " + std::to_string(at) +
                     " out of range for " + shape_str(x.shape()));
  }
  const std::int64_t area = x.dim(2) * x.dim(3);
  BasicTensor<T> a({x.dim(0), at, x.dim(2), x.dim(3)});
  BasicTensor<T> b({x.dim(0), channels - at, x.dim(2), x.dim(3)});
  for (std::int64_t n = 0; n < x.dim(0); ++n) {
    const T* src = x.raw() + n * channels * area;
    std::copy(src, src + at * area, a.raw() + n * at * area);
    std::copy(src + at * area, src + channels * area,
              b.raw() + n * (channels - at) * area);
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
BasicTensor<T> channel_concat(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank(a, 4, "channel_concat lhs");
  require_rank(b, 4, "channel_concat rhs");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw ShapeError("channel_concat shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " differ outside the channel axis");
  }
  const std::int64_t area = a.dim(2) * a.dim(3);
  const std::int64_t ca = a.dim(1), cb = b.dim(1);
  BasicTensor<T> out({a.dim(0), ca + cb, a.dim(2), a.dim(3)});
  for (std::int64_t n = 0; n < a.dim(0); ++n) {
    T* dst = out.raw() + n * (ca + cb) * area;
    std::copy(a.raw() + n * ca * area, a.raw() + (n + 1) * ca * area, dst);
    std::copy(b.raw() + n * cb * area, b.raw() + (n + 1) * cb * area,
              dst + ca * area);
  }
  return out;
}

template <typename T>
BasicTensor<T> broadcast_mul(const BasicTensor<T>& x, const BasicTensor<T>& s) {
  require_rank(x, 4, "broadcast_mul input");
  const std::int64_t batch = x.dim(0), channels = x.dim(1);
  const bool scalar = s.size() == 1;
  const bool per_image_ok =
      s.rank() == 2 && s.dim(0) == batch && (s.dim(1) == channels || s.dim(1) == 1);
  if (!scalar && !per_image_ok) {
    throw ShapeError("cannot broadcast " + shape_str(s.shape()) + " over " +
                     shape_str(x.shape()));
  }
  const bool per_channel = !scalar && s.dim(1) == channels;
  const std::int64_t area = x.dim(2) * x.dim(3);
  BasicTensor<T> out(x.shape());
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const T scale = s[scalar ? 0 : (per_channel ? n * channels + c : n)];
      const std::int64_t base = (n * channels + c) * area;
      for (std::int64_t i = 0; i < area; ++i) out[base + i] = x[base + i] * scale;
    }
  }
  return out;
}

template class BasicTensor<float>;
template class BasicTensor<double>;

#define FLIGHT_INSTANTIATE_OPS(T)                                              \
  template BasicTensor<T> conv2d<T>(const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&, const ConvSpec&);   \
  template BasicTensor<T> linear<T>(const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&,                     \
                                    const BasicTensor<T>&);                    \
  template BasicTensor<T> activation<T>(const BasicTensor<T>&, Activation,     \
                                        double);                               \
  template BasicTensor<T> global_avg_pool<T>(const BasicTensor<T>&);           \
  template BasicTensor<T> global_max_pool<T>(const BasicTensor<T>&);           \
  template std::pair<BasicTensor<T>, BasicTensor<T>> channel_split<T>(         \
      const BasicTensor<T>&, std::int64_t);                                    \
  template BasicTensor<T> channel_concat<T>(const BasicTensor<T>&,             \
                                            const BasicTensor<T>&);            \
  template BasicTensor<T> broadcast_mul<T>(const BasicTensor<T>&,              \
                                           const BasicTensor<T>&);

FLIGHT_INSTANTIATE_OPS(float)
FLIGHT_INSTANTIATE_OPS(double)

#undef FLIGHT_INSTANTIATE_OPS

}  // namespace flight
