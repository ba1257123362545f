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

#include "flight/grad_ops.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flight/kernels.h"

namespace flight::ag {
namespace {

template <typename T>
BasicTensor<T>* grad_of(const std::shared_ptr<Node<T>>& node) {
  return node->requires_grad ? &node->grad_buffer() : nullptr;
}

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()) + " differ");
  }
}

// Folds one branch flag per element into the active trace, if any.
template <typename Pred>
void note_branches(std::int64_t count, Pred taken) {
  BranchTrace* trace = active_branch_trace();
  if (trace == nullptr) return;
  std::uint64_t digest = 1469598103934665603ull;  // FNV-1a
  for (std::int64_t i = 0; i < count; ++i) {
    digest ^= taken(i) ? 1u : 2u;
    digest *= 1099511628211ull;
  }
  trace->note(digest);
}

// Shared plumbing for same-shape binary ops: `fwd` maps (a, b) -> out and
// `bwd` maps (a, b, gout) -> (da, db) per element.
template <typename T, typename Fwd, typename Bwd>
Var<T> elementwise_binary(const Var<T>& a, const Var<T>& b, const char* name,
                          Fwd fwd, Bwd bwd) {
  require_same_shape(a, b, name);
  BasicTensor<T> out(a.shape());
  const auto av = a.value().data();
  const auto bv = b.value().data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(av[i], bv[i]);
  auto& tape = tape_of<T>({&a, &b});
  if (!needs_grad<T>({&a, &b})) return tape.record(std::move(out), false, {});
  auto an = a.node(), bn = b.node();
  return tape.record(std::move(out), true,
                     [an, bn, bwd](const BasicTensor<T>& gy) {
                       BasicTensor<T>* da = grad_of(an);
                       BasicTensor<T>* db = grad_of(bn);
                       const auto av = an->value.data();
                       const auto bv = bn->value.data();
                       const auto g = gy.data();
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const auto [ga, gb] = bwd(av[i], bv[i], g[i]);
                         if (da) (*da)[i] += ga;
                         if (db) (*db)[i] += gb;
                       }
                     });
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const ConvSpec& spec) {
  BasicTensor<T> out =
      flight::conv2d(x.value(), weight.value(), bias.value(), spec);
  auto& tape = tape_of<T>({&x, &weight, &bias});
  if (!needs_grad<T>({&x, &weight, &bias})) {
    return tape.record(std::move(out), false, {});
  }
  auto xn = x.node(), wn = weight.node(), bn = bias.node();
  return tape.record(std::move(out), true,
                     [xn, wn, bn, spec](const BasicTensor<T>& gy) {
                       kernels::conv2d_backward(xn->value, wn->value, spec, gy,
                                                grad_of(xn), grad_of(wn),
                                                grad_of(bn));
                     });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  BasicTensor<T> out = flight::linear(x.value(), weight.value(), bias.value());
  auto& tape = tape_of<T>({&x, &weight, &bias});
  if (!needs_grad<T>({&x, &weight, &bias})) {
    return tape.record(std::move(out), false, {});
  }
  auto xn = x.node(), wn = weight.node(), bn = bias.node();
  return tape.record(std::move(out), true,
                     [xn, wn, bn](const BasicTensor<T>& gy) {
                       kernels::linear_backward(xn->value, wn->value, gy,
                                                grad_of(xn), grad_of(wn),
                                                grad_of(bn));
                     });
}

template <typename T>
Var<T> activation(const Var<T>& x, Activation kind, double alpha) {
  BasicTensor<T> out = flight::activation(x.value(), kind, alpha);
  if (kind == Activation::kRelu) {
    note_branches(x.value().size(), [&](std::int64_t i) { return x.value()[i] > T(0); });
  }
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true,
                     [xn, kind, alpha](const BasicTensor<T>& gy) {
                       // Only sigmoid's derivative is expressed via its output.
                       const BasicTensor<T> y =
                           kind == Activation::kSigmoid
                               ? flight::activation(xn->value, kind, alpha)
                               : BasicTensor<T>();
                       kernels::activation_backward<T>(
                           xn->value.data(),
                           kind == Activation::kSigmoid ? y.data()
                                                        : xn->value.data(),
                           kind, alpha, gy.data(), xn->grad_buffer().data());
                     });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  BasicTensor<T> out = flight::global_avg_pool(x.value());
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn](const BasicTensor<T>& gy) {
    kernels::global_avg_pool_backward(gy, xn->grad_buffer());
  });
}

template <typename T>
Var<T> global_max_pool(const Var<T>& x) {
  BasicTensor<T> out = flight::global_max_pool(x.value());
  if (active_branch_trace() != nullptr) {
    // The branch of a max is its argmax; equality with the output marks it.
    const std::int64_t area = x.value().dim(2) * x.value().dim(3);
    note_branches(x.value().size(), [&](std::int64_t i) {
      return x.value()[i] == out[i / area];
    });
  }
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn](const BasicTensor<T>& gy) {
    kernels::global_max_pool_backward(xn->value, gy, xn->grad_buffer());
  });
}

template <typename T>
std::pair<Var<T>, Var<T>> channel_split(const Var<T>& x, std::int64_t at) {
  auto [a, b] = flight::channel_split(x.value(), at);
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) {
    return {tape.record(std::move(a), false, {}),
            tape.record(std::move(b), false, {})};
  }
  auto xn = x.node();
  const std::int64_t channels = x.value().dim(1);
  const std::int64_t area = x.value().dim(2) * x.value().dim(3);
  const std::int64_t batch = x.value().dim(0);
  // offset/width select the channel window each half maps back onto.
  auto rule = [xn, channels, area, batch](std::int64_t offset,
                                          std::int64_t width) {
    return [=](const BasicTensor<T>& gy) {
      BasicTensor<T>& gx = xn->grad_buffer();
      for (std::int64_t n = 0; n < batch; ++n) {
        const T* src = gy.raw() + n * width * area;
        T* dst = gx.raw() + (n * channels + offset) * area;
        for (std::int64_t i = 0; i < width * area; ++i) dst[i] += src[i];
      }
    };
  };
  return {tape.record(std::move(a), true, rule(0, at)),
          tape.record(std::move(b), true, rule(at, channels - at))};
}

template <typename T>
Var<T> channel_concat(const Var<T>& a, const Var<T>& b) {
  BasicTensor<T> out = flight::channel_concat(a.value(), b.value());
  auto& tape = tape_of<T>({&a, &b});
  if (!needs_grad<T>({&a, &b})) return tape.record(std::move(out), false, {});
  auto an = a.node(), bn = b.node();
  return tape.record(std::move(out), true, [an, bn](const BasicTensor<T>& gy) {
    const std::int64_t batch = gy.dim(0);
    const std::int64_t area = gy.dim(2) * gy.dim(3);
    const std::int64_t ca = an->value.dim(1), cb = bn->value.dim(1);
    for (std::int64_t n = 0; n < batch; ++n) {
      const T* src = gy.raw() + n * (ca + cb) * area;
      if (an->requires_grad) {
        T* dst = an->grad_buffer().raw() + n * ca * area;
        for (std::int64_t i = 0; i < ca * area; ++i) dst[i] += src[i];
      }
      if (bn->requires_grad) {
        T* dst = bn->grad_buffer().raw() + n * cb * area;
        for (std::int64_t i = 0; i < cb * area; ++i) dst[i] += src[ca * area + i];
      }
    }
  });
}

template <typename T>
Var<T> broadcast_mul(const Var<T>& x, const Var<T>& s) {
  BasicTensor<T> out = flight::broadcast_mul(x.value(), s.value());
  auto& tape = tape_of<T>({&x, &s});
  if (!needs_grad<T>({&x, &s})) return tape.record(std::move(out), false, {});
  auto xn = x.node(), sn = s.node();
  return tape.record(std::move(out), true, [xn, sn](const BasicTensor<T>& gy) {
    kernels::broadcast_mul_backward(xn->value, sn->value, gy, grad_of(xn),
                                    grad_of(sn));
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return elementwise_binary(
      a, b, "add", [](T x, T y) { return x + y; },
      [](T, T, T g) { return std::pair<T, T>{g, g}; });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return elementwise_binary(
      a, b, "sub", [](T x, T y) { return x - y; },
      [](T, T, T g) { return std::pair<T, T>{g, -g}; });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return elementwise_binary(
      a, b, "mul", [](T x, T y) { return x * y; },
      [](T x, T y, T g) { return std::pair<T, T>{g * y, g * x}; });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  return elementwise_binary(
      a, b, "div", [](T x, T y) { return x / y; },
      [](T x, T y, T g) { return std::pair<T, T>{g / y, -g * x / (y * y)}; });
}

template <typename T>
Var<T> scale(const Var<T>& x, double factor) {
  BasicTensor<T> out(x.shape());
  const T f = static_cast<T>(factor);
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * f;
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn, f](const BasicTensor<T>& gy) {
    BasicTensor<T>& gx = xn->grad_buffer();
    for (std::int64_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * f;
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, double offset) {
  BasicTensor<T> out(x.shape());
  const T o = static_cast<T>(offset);
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] + o;
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn](const BasicTensor<T>& gy) {
    BasicTensor<T>& gx = xn->grad_buffer();
    for (std::int64_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
}

template <typename T>
Var<T> pow_floor(const Var<T>& x, double exponent, double floor) {
  BasicTensor<T> out(x.shape());
  const T p = static_cast<T>(exponent), lo = static_cast<T>(floor);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = std::pow(std::max(x.value()[i], lo), p);
  }
  note_branches(out.size(), [&](std::int64_t i) { return x.value()[i] >= lo; });
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn, p, lo](const BasicTensor<T>& gy) {
    BasicTensor<T>& gx = xn->grad_buffer();
    for (std::int64_t i = 0; i < gy.size(); ++i) {
      const T v = xn->value[i];
      if (v >= lo) gx[i] += gy[i] * p * std::pow(v, p - T(1));
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = T(0);
  for (T v : x.value().data()) acc += v;
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) {
    return tape.record(BasicTensor<T>::scalar(acc), false, {});
  }
  auto xn = x.node();
  return tape.record(BasicTensor<T>::scalar(acc), true,
                     [xn](const BasicTensor<T>& gy) {
                       BasicTensor<T>& gx = xn->grad_buffer();
                       for (std::int64_t i = 0; i < gx.size(); ++i) gx[i] += gy[0];
                     });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

template <typename T>
Var<T> separable_filter_valid(const Var<T>& x, std::span<const double> taps) {
  if (x.value().rank() != 4 ||
      x.value().dim(2) < static_cast<std::int64_t>(taps.size()) ||
      x.value().dim(3) < static_cast<std::int64_t>(taps.size())) {
    throw ShapeError("filter of " + std::to_string(taps.size()) +
                     " taps does not fit input " + shape_str(x.shape()));
  }
  BasicTensor<T> out = kernels::separable_filter_valid(x.value(), taps);
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  std::vector<double> kept(taps.begin(), taps.end());
  return tape.record(std::move(out), true,
                     [xn, kept](const BasicTensor<T>& gy) {
                       kernels::separable_filter_valid_backward(
                           gy, std::span<const double>(kept), xn->grad_buffer());
                     });
}

template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
  if (x.value().rank() != 4 || x.value().dim(2) < 2 || x.value().dim(3) < 2) {
    throw ShapeError("avg_pool2 needs NCHW input of at least 2x2, got " +
                     shape_str(x.shape()));
  }
  BasicTensor<T> out = kernels::avg_pool2(x.value());
  auto& tape = tape_of<T>({&x});
  if (!needs_grad<T>({&x})) return tape.record(std::move(out), false, {});
  auto xn = x.node();
  return tape.record(std::move(out), true, [xn](const BasicTensor<T>& gy) {
    kernels::avg_pool2_backward(gy, xn->grad_buffer());
  });
}

#define FLIGHT_INSTANTIATE_GRAD_OPS(T)                                         \
  template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&,       \
                            const ConvSpec&);                                  \
  template Var<T> linear<T>(const Var<T>&, const Var<T>&, const Var<T>&);      \
  template Var<T> activation<T>(const Var<T>&, Activation, double);            \
  template Var<T> global_avg_pool<T>(const Var<T>&);                           \
  template Var<T> global_max_pool<T>(const Var<T>&);                           \
  template std::pair<Var<T>, Var<T>> channel_split<T>(const Var<T>&,           \
                                                      std::int64_t);           \
  template Var<T> channel_concat<T>(const Var<T>&, const Var<T>&);             \
  template Var<T> broadcast_mul<T>(const Var<T>&, const Var<T>&);              \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                        \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                        \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                        \
  template Var<T> div<T>(const Var<T>&, const Var<T>&);                        \
  template Var<T> scale<T>(const Var<T>&, double);                             \
  template Var<T> add_scalar<T>(const Var<T>&, double);                        \
  template Var<T> pow_floor<T>(const Var<T>&, double, double);                 \
  template Var<T> sum<T>(const Var<T>&);                                       \
  template Var<T> mean<T>(const Var<T>&);                                      \
  template Var<T> separable_filter_valid<T>(const Var<T>&,                     \
                                            std::span<const double>);          \
  template Var<T> avg_pool2<T>(const Var<T>&);

FLIGHT_INSTANTIATE_GRAD_OPS(float)
FLIGHT_INSTANTIATE_GRAD_OPS(double)

#undef FLIGHT_INSTANTIATE_GRAD_OPS

}  // namespace flight::ag
