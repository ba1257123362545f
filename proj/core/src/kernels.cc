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

#include "flight/kernels.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

namespace flight::kernels {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

bool is_pointwise(const ConvSpec& spec) {
  return spec.kernel_h == 1 && spec.kernel_w == 1 && spec.stride == 1 &&
         spec.padding == 0;
}

// Unfolds one CHW image into a (C*kh*kw) x (Ho*Wo) patch matrix.
template <typename T>
void im2col(const T* img, std::int64_t channels, std::int64_t height,
            std::int64_t width, const ConvSpec& spec, std::int64_t out_h,
            std::int64_t out_w, T* col) {
  const std::int64_t plane = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    const T* src = img + c * height * width;
    for (std::int64_t ki = 0; ki < spec.kernel_h; ++ki) {
      for (std::int64_t kj = 0; kj < spec.kernel_w; ++kj) {
        T* row = col + ((c * spec.kernel_h + ki) * spec.kernel_w + kj) * plane;
        for (std::int64_t oh = 0; oh < out_h; ++oh) {
          const std::int64_t ih = oh * spec.stride - spec.padding + ki;
          T* dst = row + oh * out_w;
          if (ih < 0 || ih >= height) {
            std::fill(dst, dst + out_w, T(0));
            continue;
          }
          const T* src_row = src + ih * width;
          for (std::int64_t ow = 0; ow < out_w; ++ow) {
            const std::int64_t iw = ow * spec.stride - spec.padding + kj;
            dst[ow] = (iw >= 0 && iw < width) ? src_row[iw] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters patch-matrix gradients back onto the image.
template <typename T>
void col2im_add(const T* col, std::int64_t channels, std::int64_t height,
                std::int64_t width, const ConvSpec& spec, std::int64_t out_h,
                std::int64_t out_w, T* img) {
  const std::int64_t plane = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    T* dst = img + c * height * width;
    for (std::int64_t ki = 0; ki < spec.kernel_h; ++ki) {
      for (std::int64_t kj = 0; kj < spec.kernel_w; ++kj) {
        const T* row =
            col + ((c * spec.kernel_h + ki) * spec.kernel_w + kj) * plane;
        for (std::int64_t oh = 0; oh < out_h; ++oh) {
          const std::int64_t ih = oh * spec.stride - spec.padding + ki;
          if (ih < 0 || ih >= height) continue;
          T* dst_row = dst + ih * width;
          const T* src = row + oh * out_w;
          for (std::int64_t ow = 0; ow < out_w; ++ow) {
            const std::int64_t iw = ow * spec.stride - spec.padding + kj;
            if (iw >= 0 && iw < width) dst_row[iw] += src[ow];
          }
        }
      }
    }
  }
}

template <typename T>
T sigmoid_of(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                    const BasicTensor<T>* b, const ConvSpec& spec,
                    BasicTensor<T>& y) {
  const std::int64_t batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const std::int64_t out_h = y.dim(2), out_w = y.dim(3);
  const std::int64_t patch = spec.in_channels * spec.kernel_h * spec.kernel_w;
  const std::int64_t plane = out_h * out_w;
  ConstMatrixMap<T> weight(w.raw(), spec.out_channels, patch);
  std::vector<T> col;
  if (!is_pointwise(spec)) col.resize(static_cast<std::size_t>(patch * plane));
  for (std::int64_t n = 0; n < batch; ++n) {
    const T* img = x.raw() + n * spec.in_channels * height * width;
    const T* col_ptr = img;
    if (!is_pointwise(spec)) {
      im2col(img, spec.in_channels, height, width, spec, out_h, out_w,
             col.data());
      col_ptr = col.data();
    }
    ConstMatrixMap<T> cols(col_ptr, patch, plane);
    MatrixMap<T> out(y.raw() + n * spec.out_channels * plane,
                     spec.out_channels, plane);
    out.noalias() = weight * cols;
    if (b != nullptr) {
      for (std::int64_t o = 0; o < spec.out_channels; ++o) {
        out.row(o).array() += (*b)[o];
      }
    }
  }
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                     const ConvSpec& spec, const BasicTensor<T>& dy,
                     BasicTensor<T>* dx, BasicTensor<T>* dw,
                     BasicTensor<T>* db) {
  const std::int64_t batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const std::int64_t out_h = dy.dim(2), out_w = dy.dim(3);
  const std::int64_t patch = spec.in_channels * spec.kernel_h * spec.kernel_w;
  const std::int64_t plane = out_h * out_w;
  const bool pointwise = is_pointwise(spec);
  ConstMatrixMap<T> weight(w.raw(), spec.out_channels, patch);
  std::vector<T> col, dcol;
  if (!pointwise && dw != nullptr) col.resize(static_cast<std::size_t>(patch * plane));
  if (!pointwise && dx != nullptr) dcol.resize(static_cast<std::size_t>(patch * plane));
  for (std::int64_t n = 0; n < batch; ++n) {
    ConstMatrixMap<T> grad_out(dy.raw() + n * spec.out_channels * plane,
                               spec.out_channels, plane);
    const T* img = x.raw() + n * spec.in_channels * height * width;
    if (db != nullptr) {
      // Plain loop: Eigen's vectorised sum depends on buffer alignment, which
      // would make training results vary between runs.
      for (std::int64_t o = 0; o < spec.out_channels; ++o) {
        const T* row = dy.raw() + (n * spec.out_channels + o) * plane;
        T acc = T(0);
        for (std::int64_t i = 0; i < plane; ++i) acc += row[i];
        (*db)[o] += acc;
      }
    }
    if (dw != nullptr) {
      const T* col_ptr = img;
      if (!pointwise) {
        im2col(img, spec.in_channels, height, width, spec, out_h, out_w,
               col.data());
        col_ptr = col.data();
      }
      ConstMatrixMap<T> cols(col_ptr, patch, plane);
      MatrixMap<T> grad_w(dw->raw(), spec.out_channels, patch);
      grad_w.noalias() += grad_out * cols.transpose();
    }
    if (dx != nullptr) {
      T* grad_img = dx->raw() + n * spec.in_channels * height * width;
      if (pointwise) {
        MatrixMap<T> grad_in(grad_img, patch, plane);
        grad_in.noalias() += weight.transpose() * grad_out;
      } else {
        MatrixMap<T> grad_cols(dcol.data(), patch, plane);
        grad_cols.noalias() = weight.transpose() * grad_out;
        col2im_add(dcol.data(), spec.in_channels, height, width, spec, out_h,
                   out_w, grad_img);
      }
    }
  }
}

template <typename T>
void linear_forward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                    const BasicTensor<T>* b, BasicTensor<T>& y) {
  const std::int64_t rows = x.dim(0), in = x.dim(1), out = w.dim(0);
  ConstMatrixMap<T> input(x.raw(), rows, in);
  ConstMatrixMap<T> weight(w.raw(), out, in);
  MatrixMap<T> result(y.raw(), rows, out);
  result.noalias() = input * weight.transpose();
  if (b != nullptr) {
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t g = 0; g < out; ++g) result(r, g) += (*b)[g];
    }
  }
}

template <typename T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w,
                     const BasicTensor<T>& dy, BasicTensor<T>* dx,
                     BasicTensor<T>* dw, BasicTensor<T>* db) {
  const std::int64_t rows = x.dim(0), in = x.dim(1), out = w.dim(0);
  ConstMatrixMap<T> grad_out(dy.raw(), rows, out);
  if (dx != nullptr) {
    ConstMatrixMap<T> weight(w.raw(), out, in);
    MatrixMap<T> grad_in(dx->raw(), rows, in);
    grad_in.noalias() += grad_out * weight;
  }
  if (dw != nullptr) {
    ConstMatrixMap<T> input(x.raw(), rows, in);
    MatrixMap<T> grad_w(dw->raw(), out, in);
    grad_w.noalias() += grad_out.transpose() * input;
  }
  if (db != nullptr) {
    for (std::int64_t g = 0; g < out; ++g) {
      T acc = T(0);
      for (std::int64_t r = 0; r < rows; ++r) acc += grad_out(r, g);
      (*db)[g] += acc;
    }
  }
}

template <typename T>
void activation_forward(std::span<const T> x, Activation kind, double alpha,
                        std::span<T> y) {
  const T a = static_cast<T>(alpha);
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    case Activation::kCelu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] > T(0) ? x[i] : a * std::expm1(x[i] / a);
      }
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_of(x[i]);
      break;
    case Activation::kSoftplus:
      // max(x, 0) + log1p(exp(-|x|)) never overflows.
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::max(x[i], T(0)) + std::log1p(std::exp(-std::abs(x[i])));
      }
      break;
  }
}

template <typename T>
void activation_backward(std::span<const T> x, std::span<const T> y,
                         Activation kind, double alpha, std::span<const T> dy,
                         std::span<T> dx) {
  const T a = static_cast<T>(alpha);
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > T(0)) dx[i] += dy[i];
      }
      break;
    case Activation::kCelu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        dx[i] += dy[i] * (x[i] > T(0) ? T(1) : std::exp(x[i] / a));
      }
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) {
        dx[i] += dy[i] * y[i] * (T(1) - y[i]);
      }
      break;
    case Activation::kSoftplus:
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] += dy[i] * sigmoid_of(x[i]);
      break;
  }
}

template <typename T>
void global_avg_pool_backward(const BasicTensor<T>& dy, BasicTensor<T>& dx) {
  const std::int64_t planes = dx.dim(0) * dx.dim(1);
  const std::int64_t area = dx.dim(2) * dx.dim(3);
  const T inv = T(1) / static_cast<T>(area);
  for (std::int64_t p = 0; p < planes; ++p) {
    const T g = dy[p] * inv;
    T* dst = dx.raw() + p * area;
    for (std::int64_t i = 0; i < area; ++i) dst[i] += g;
  }
}

template <typename T>
void global_max_pool_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy,
                              BasicTensor<T>& dx) {
  const std::int64_t planes = x.dim(0) * x.dim(1);
  const std::int64_t area = x.dim(2) * x.dim(3);
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* src = x.raw() + p * area;
    const std::int64_t arg = std::max_element(src, src + area) - src;
    dx[p * area + arg] += dy[p];
  }
}

template <typename T>
void broadcast_mul_backward(const BasicTensor<T>& x, const BasicTensor<T>& s,
                            const BasicTensor<T>& dy, BasicTensor<T>* dx,
                            BasicTensor<T>* ds) {
  const std::int64_t batch = x.dim(0), channels = x.dim(1);
  const std::int64_t area = x.dim(2) * x.dim(3);
  const bool scalar = s.size() == 1;
  const bool per_channel = !scalar && s.dim(1) == channels;
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const std::int64_t si = scalar ? 0 : (per_channel ? n * channels + c : n);
      const std::int64_t base = (n * channels + c) * area;
      const T scale = s[si];
      T acc = T(0);
      for (std::int64_t i = 0; i < area; ++i) {
        if (dx != nullptr) (*dx)[base + i] += dy[base + i] * scale;
        acc += dy[base + i] * x[base + i];
      }
      if (ds != nullptr) (*ds)[si] += acc;
    }
  }
}

template <typename T>
BasicTensor<T> separable_filter_valid(const BasicTensor<T>& x,
                                      std::span<const double> taps) {
  const std::int64_t k = static_cast<std::int64_t>(taps.size());
  const std::int64_t planes = x.dim(0) * x.dim(1);
  const std::int64_t height = x.dim(2), width = x.dim(3);
  const std::int64_t out_h = height - k + 1, out_w = width - k + 1;
  BasicTensor<T> y({x.dim(0), x.dim(1), out_h, out_w});
  std::vector<T> tmp(static_cast<std::size_t>(height * out_w));
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* src = x.raw() + p * height * width;
    for (std::int64_t h = 0; h < height; ++h) {
      for (std::int64_t w = 0; w < out_w; ++w) {
        T acc = T(0);
        for (std::int64_t j = 0; j < k; ++j) {
          acc += static_cast<T>(taps[j]) * src[h * width + w + j];
        }
        tmp[h * out_w + w] = acc;
      }
    }
    T* dst = y.raw() + p * out_h * out_w;
    for (std::int64_t h = 0; h < out_h; ++h) {
      for (std::int64_t w = 0; w < out_w; ++w) {
        T acc = T(0);
        for (std::int64_t i = 0; i < k; ++i) {
          acc += static_cast<T>(taps[i]) * tmp[(h + i) * out_w + w];
        }
        dst[h * out_w + w] = acc;
      }
    }
  }
  return y;
}

template <typename T>
void separable_filter_valid_backward(const BasicTensor<T>& dy,
                                     std::span<const double> taps,
                                     BasicTensor<T>& dx) {
  const std::int64_t k = static_cast<std::int64_t>(taps.size());
  const std::int64_t planes = dx.dim(0) * dx.dim(1);
  const std::int64_t height = dx.dim(2), width = dx.dim(3);
  const std::int64_t out_h = dy.dim(2), out_w = dy.dim(3);
  std::vector<T> dtmp(static_cast<std::size_t>(height * out_w));
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* g = dy.raw() + p * out_h * out_w;
    std::fill(dtmp.begin(), dtmp.end(), T(0));
    for (std::int64_t h = 0; h < out_h; ++h) {
      for (std::int64_t i = 0; i < k; ++i) {
        const T t = static_cast<T>(taps[i]);
        for (std::int64_t w = 0; w < out_w; ++w) {
          dtmp[(h + i) * out_w + w] += t * g[h * out_w + w];
        }
      }
    }
    T* dst = dx.raw() + p * height * width;
    for (std::int64_t h = 0; h < height; ++h) {
      for (std::int64_t w = 0; w < out_w; ++w) {
        const T v = dtmp[h * out_w + w];
        for (std::int64_t j = 0; j < k; ++j) {
          dst[h * width + w + j] += static_cast<T>(taps[j]) * v;
        }
      }
    }
  }
}

template <typename T>
BasicTensor<T> avg_pool2(const BasicTensor<T>& x) {
  const std::int64_t planes = x.dim(0) * x.dim(1);
  const std::int64_t height = x.dim(2), width = x.dim(3);
  const std::int64_t out_h = height / 2, out_w = width / 2;
  BasicTensor<T> y({x.dim(0), x.dim(1), out_h, out_w});
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* src = x.raw() + p * height * width;
    T* dst = y.raw() + p * out_h * out_w;
    for (std::int64_t h = 0; h < out_h; ++h) {
      for (std::int64_t w = 0; w < out_w; ++w) {
        const T* a = src + (2 * h) * width + 2 * w;
        dst[h * out_w + w] = T(0.25) * (a[0] + a[1] + a[width] + a[width + 1]);
      }
    }
  }
  return y;
}

template <typename T>
void avg_pool2_backward(const BasicTensor<T>& dy, BasicTensor<T>& dx) {
  const std::int64_t planes = dx.dim(0) * dx.dim(1);
  const std::int64_t height = dx.dim(2), width = dx.dim(3);
  const std::int64_t out_h = dy.dim(2), out_w = dy.dim(3);
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* g = dy.raw() + p * out_h * out_w;
    T* dst = dx.raw() + p * height * width;
    for (std::int64_t h = 0; h < out_h; ++h) {
      for (std::int64_t w = 0; w < out_w; ++w) {
        const T v = T(0.25) * g[h * out_w + w];
        T* a = dst + (2 * h) * width + 2 * w;
        a[0] += v;
        a[1] += v;
        a[width] += v;
        a[width + 1] += v;
      }
    }
  }
}

#define FLIGHT_INSTANTIATE_KERNELS(T)                                          \
  template void conv2d_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&, \
                                  const BasicTensor<T>*, const ConvSpec&,      \
                                  BasicTensor<T>&);                            \
  template void conv2d_backward<T>(                                            \
      const BasicTensor<T>&, const BasicTensor<T>&, const ConvSpec&,           \
      const BasicTensor<T>&, BasicTensor<T>*, BasicTensor<T>*,                 \
      BasicTensor<T>*);                                                        \
  template void linear_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&, \
                                  const BasicTensor<T>*, BasicTensor<T>&);     \
  template void linear_backward<T>(                                            \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,     \
      BasicTensor<T>*, BasicTensor<T>*, BasicTensor<T>*);                      \
  template void activation_forward<T>(std::span<const T>, Activation, double,  \
                                      std::span<T>);                           \
  template void activation_backward<T>(std::span<const T>, std::span<const T>, \
                                       Activation, double, std::span<const T>, \
                                       std::span<T>);                          \
  template void global_avg_pool_backward<T>(const BasicTensor<T>&,             \
                                            BasicTensor<T>&);                  \
  template void global_max_pool_backward<T>(                                   \
      const BasicTensor<T>&, const BasicTensor<T>&, BasicTensor<T>&);          \
  template void broadcast_mul_backward<T>(                                     \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,     \
      BasicTensor<T>*, BasicTensor<T>*);                                       \
  template BasicTensor<T> separable_filter_valid<T>(const BasicTensor<T>&,     \
                                                    std::span<const double>);  \
  template void separable_filter_valid_backward<T>(                            \
      const BasicTensor<T>&, std::span<const double>, BasicTensor<T>&);        \
  template BasicTensor<T> avg_pool2<T>(const BasicTensor<T>&);                 \
  template void avg_pool2_backward<T>(const BasicTensor<T>&, BasicTensor<T>&);

FLIGHT_INSTANTIATE_KERNELS(float)
FLIGHT_INSTANTIATE_KERNELS(double)

#undef FLIGHT_INSTANTIATE_KERNELS

}  // namespace flight::kernels
