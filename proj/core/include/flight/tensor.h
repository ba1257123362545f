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

#ifndef FLIGHT_TENSOR_H_
#define FLIGHT_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flight {

using Shape = std::vector<std::int64_t>;

std::string shape_str(const Shape& shape);
std::int64_t shape_numel(const Shape& shape);

// Raised for any violated shape or extent precondition. The message names
// the offending shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major array of rank 1..4, last axis fastest. Images and feature
// maps are NCHW.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0));
  BasicTensor(Shape shape, std::vector<T> data);

  static BasicTensor scalar(T value) { return BasicTensor({1}, value); }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int axis) const { return shape_.at(axis); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const {
    return data_[static_cast<std::size_t>(i)];
  }

  // NCHW element access; rank must be 4.
  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[offset(n, c, h, w)];
  }
  const T& at(std::int64_t n, std::int64_t c, std::int64_t h,
              std::int64_t w) const {
    return data_[offset(n, c, h, w)];
  }

  void fill(T value);
  BasicTensor reshaped(Shape shape) const;

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor& other) const = default;

 private:
  std::size_t offset(std::int64_t n, std::int64_t c, std::int64_t h,
                     std::int64_t w) const {
    return static_cast<std::size_t>(
        ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w);
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// Geometry of a 2-D convolution. Padding is symmetric zero padding.
struct ConvSpec {
  std::int64_t out_channels = 1;
  std::int64_t in_channels = 1;
  std::int64_t kernel_h = 1;
  std::int64_t kernel_w = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;

  Shape weight_shape() const {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
  Shape bias_shape() const { return {out_channels}; }
  // Output extent along one axis; throws ShapeError if non-integral or < 1.
  std::int64_t output_extent(std::int64_t input_extent) const;
};

ConvSpec conv_spec(std::int64_t out_channels, std::int64_t in_channels,
                   std::int64_t kernel, std::int64_t stride = 1,
                   std::int64_t padding = -1);

enum class Activation { kRelu, kCelu, kSigmoid, kSoftplus };

const char* activation_name(Activation kind);

// Forward kernels. All are pure; outputs are freshly allocated.

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, const ConvSpec& spec);

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& x, Activation kind,
                          double alpha = 1.0);

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x);

// Per-(n, c) maximum over spatial positions; N x C.
template <typename T>
BasicTensor<T> global_max_pool(const BasicTensor<T>& x);

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_split(const BasicTensor<T>& x,
                                                        std::int64_t at);

template <typename T>
BasicTensor<T> channel_concat(const BasicTensor<T>& a, const BasicTensor<T>& b);

// x is NCHW; s is N x C, N x 1 or a single-element tensor.
template <typename T>
BasicTensor<T> broadcast_mul(const BasicTensor<T>& x, const BasicTensor<T>& s);

}  // namespace flight

#endif  // FLIGHT_TENSOR_H_
