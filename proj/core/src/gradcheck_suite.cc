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

#include "flight/gradcheck_suite.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "flight/grad_ops.h"
#include "flight/loss.h"
#include "flight/model.h"
#include "flight/params.h"
#include "flight/random.h"

namespace flight {
namespace {

using VarD = ag::Var<double>;
using Inputs = std::span<const VarD>;

struct Case {
  std::string op;
  std::function<std::vector<TensorD>(Rng&)> make_point;
  GradFn fn;
  GradCheckOptions options;
  // Overrides the suite step. Image-quality losses use a wider step: their
  // border pixels have gradients near 1e-9, where rounding in the
  // differences dominates at the default step.
  double eps = 0.0;
};

TensorD uniform_tensor(Shape shape, Rng& rng, double lo, double hi) {
  TensorD t(std::move(shape));
  for (double& v : t.data()) v = uniform(rng, lo, hi);
  return t;
}

// Uniform in [-1, 1] excluding (-margin, margin).
TensorD away_from_zero(Shape shape, Rng& rng, double margin) {
  TensorD t(std::move(shape));
  for (double& v : t.data()) {
    const double mag = uniform(rng, margin, 1.0);
    v = uniform01(rng) < 0.5 ? -mag : mag;
  }
  return t;
}

Case unary(std::string op, Shape shape, double lo, double hi,
           std::function<VarD(const VarD&)> f) {
  return {std::move(op),
          [shape, lo, hi](Rng& rng) {
            return std::vector<TensorD>{uniform_tensor(shape, rng, lo, hi)};
          },
          [f](Inputs in) { return f(in[0]); },
          {}};
}

Case binary(std::string op, Shape a, Shape b, double b_lo, double b_hi,
            std::function<VarD(const VarD&, const VarD&)> f) {
  return {std::move(op),
          [a, b, b_lo, b_hi](Rng& rng) {
            return std::vector<TensorD>{uniform_tensor(a, rng, -1.0, 1.0),
                                        uniform_tensor(b, rng, b_lo, b_hi)};
          },
          [f](Inputs in) { return f(in[0], in[1]); },
          {}};
}

Case conv_case(std::string op, Shape x, std::int64_t out_channels,
               std::int64_t kernel, std::int64_t stride) {
  const ConvSpec spec = conv_spec(out_channels, x[1], kernel, stride);
  return {std::move(op),
          [x, spec](Rng& rng) {
            return std::vector<TensorD>{
                uniform_tensor(x, rng, -1.0, 1.0),
                uniform_tensor(spec.weight_shape(), rng, -0.5, 0.5),
                uniform_tensor(spec.bias_shape(), rng, -0.5, 0.5)};
          },
          [spec](Inputs in) { return ag::conv2d(in[0], in[1], in[2], spec); },
          {}};
}

// A model block checked with respect to its image input and every
// parameter whose name starts with one of `prefixes`.
Case model_case(std::string op, Shape image, double lo, double hi,
                const ModelConfig& cfg, std::vector<std::string> prefixes,
                std::function<VarD(const VarD&, const ParamVars<double>&)> f) {
  std::vector<std::string> names;
  for (const auto& spec : param_layout(cfg)) {
    for (const auto& prefix : prefixes) {
      if (spec.name.rfind(prefix, 0) == 0) {
        names.push_back(spec.name);
        break;
      }
    }
  }
  auto make = [image, lo, hi, cfg, names](Rng& rng) {
    std::vector<TensorD> point{uniform_tensor(image, rng, lo, hi)};
    const auto store = init_params(cfg, rng()).cast<double>();
    for (const auto& name : names) {
      TensorD value = store.value(name);
      if (value.rank() == 1) {
        // Biases start at zero; probe a generic point instead.
        for (double& v : value.data()) v = uniform(rng, -0.1, 0.1);
      }
      point.push_back(std::move(value));
    }
    return point;
  };
  auto fn = [names, f](Inputs in) {
    ParamVars<double> vars;
    for (std::size_t i = 0; i < names.size(); ++i) vars.set(names[i], in[i + 1]);
    return f(in[0], vars);
  };
  return {std::move(op), make, fn, {}};
}

// Target close to the prediction, as during training, so that contrast
// terms stay clear of the MS-SSIM floor.
std::vector<TensorD> image_pair(Rng& rng, Shape shape) {
  TensorD pred = uniform_tensor(shape, rng, 0.1, 0.9);
  TensorD target = pred;
  for (double& v : target.data()) v = std::clamp(v + uniform(rng, -0.1, 0.1), 0.0, 1.0);
  return {std::move(pred), std::move(target)};
}

std::vector<Case> build_cases(const GradCheckSuiteOptions& options) {
  const ModelConfig cfg;
  const double a = cfg.celu_alpha;
  std::vector<Case> cases;

  cases.push_back(conv_case("conv2d_k3_s1", {2, 3, 8, 8}, 4, 3, 1));
  cases.push_back(conv_case("conv2d_k7_s2", {1, 3, 11, 10}, 4, 7, 2));
  cases.push_back(conv_case("conv2d_k1", {2, 6, 5, 5}, 4, 1, 1));
  cases.push_back({"linear",
                   [](Rng& rng) {
                     return std::vector<TensorD>{
                         uniform_tensor({3, 5}, rng, -1, 1),
                         uniform_tensor({4, 5}, rng, -1, 1),
                         uniform_tensor({4}, rng, -1, 1)};
                   },
                   [](Inputs in) { return ag::linear(in[0], in[1], in[2]); },
                   {}});
  {
    GradCheckOptions opts;
    // Inputs keep at least 10 * eps from the kink.
    const double margin = 10.0 * options.eps;
    cases.push_back({"relu",
                     [margin](Rng& rng) {
                       return std::vector<TensorD>{
                           away_from_zero({2, 3, 5, 5}, rng, margin)};
                     },
                     [](Inputs in) { return ag::relu(in[0]); },
                     opts});
  }
  cases.push_back(unary("celu", {2, 3, 5, 5}, -3, 3,
                        [a](const VarD& x) { return ag::celu(x, a); }));
  cases.push_back(unary("celu_alpha_0.5", {2, 3, 5, 5}, -3, 3,
                        [](const VarD& x) { return ag::celu(x, 0.5); }));
  cases.push_back(unary("sigmoid", {2, 3, 5, 5}, -4, 4,
                        [](const VarD& x) { return ag::sigmoid(x); }));
  cases.push_back(unary("softplus", {2, 3, 5, 5}, -4, 4,
                        [](const VarD& x) { return ag::softplus(x); }));
  cases.push_back(unary("global_avg_pool", {2, 4, 5, 6}, -1, 1,
                        [](const VarD& x) { return ag::global_avg_pool(x); }));
  cases.push_back(unary("global_max_pool", {2, 4, 5, 6}, -1, 1,
                        [](const VarD& x) { return ag::global_max_pool(x); }));
  cases.push_back(unary("channel_split", {2, 6, 4, 4}, -1, 1, [](const VarD& x) {
    auto [lo, hi] = ag::channel_split(x, 2);
    return ag::channel_concat(hi, ag::scale(lo, 2.0));
  }));
  cases.push_back(binary("channel_concat", {2, 2, 4, 4}, {2, 3, 4, 4}, -1, 1,
                         [](const VarD& x, const VarD& y) {
                           return ag::channel_concat(x, y);
                         }));
  cases.push_back(binary("broadcast_mul_nc", {2, 4, 3, 3}, {2, 4}, -1, 1,
                         [](const VarD& x, const VarD& s) {
                           return ag::broadcast_mul(x, s);
                         }));
  cases.push_back(binary("broadcast_mul_n1", {2, 4, 3, 3}, {2, 1}, -1, 1,
                         [](const VarD& x, const VarD& s) {
                           return ag::broadcast_mul(x, s);
                         }));
  cases.push_back(binary("broadcast_mul_scalar", {2, 4, 3, 3}, {1}, -1, 1,
                         [](const VarD& x, const VarD& s) {
                           return ag::broadcast_mul(x, s);
                         }));
  cases.push_back(binary("add", {2, 3, 4, 4}, {2, 3, 4, 4}, -1, 1,
                         [](const VarD& x, const VarD& y) { return ag::add(x, y); }));
  cases.push_back(binary("sub", {2, 3, 4, 4}, {2, 3, 4, 4}, -1, 1,
                         [](const VarD& x, const VarD& y) { return ag::sub(x, y); }));
  cases.push_back(binary("mul", {2, 3, 4, 4}, {2, 3, 4, 4}, -1, 1,
                         [](const VarD& x, const VarD& y) { return ag::mul(x, y); }));
  cases.push_back(binary("div", {2, 3, 4, 4}, {2, 3, 4, 4}, 0.5, 1.5,
                         [](const VarD& x, const VarD& y) { return ag::div(x, y); }));
  cases.push_back(unary("scale", {2, 3, 4, 4}, -1, 1,
                        [](const VarD& x) { return ag::scale(x, -1.7); }));
  cases.push_back(unary("add_scalar", {2, 3, 4, 4}, -1, 1,
                        [](const VarD& x) { return ag::add_scalar(x, 0.3); }));
  cases.push_back(unary("pow_floor", {2, 3, 4, 4}, 0.05, 1.5, [](const VarD& x) {
    return ag::pow_floor(x, 0.3, 1e-6);
  }));
  cases.push_back(unary("sum", {2, 3, 4, 4}, -1, 1,
                        [](const VarD& x) { return ag::sum(x); }));
  cases.push_back(unary("mean", {2, 3, 4, 4}, -1, 1,
                        [](const VarD& x) { return ag::mean(x); }));
  {
    const auto taps = gaussian_taps(11, 1.5);
    cases.push_back(unary("separable_filter_valid", {1, 2, 14, 13}, -1, 1,
                          [taps](const VarD& x) {
                            return ag::separable_filter_valid(x, taps);
                          }));
  }
  cases.push_back(unary("avg_pool2", {1, 2, 7, 6}, -1, 1,
                        [](const VarD& x) { return ag::avg_pool2(x); }));

  const Shape image{2, 3, 12, 12};
  const Shape features{2, cfg.gisp_channels, 10, 10};
  cases.push_back(model_case("ime", image, 0.0, 1.0, cfg, {"sdia.ime."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return ime_forward(x, p, cfg);
                             }));
  cases.push_back(model_case("ge", image, 0.0, 1.0, cfg, {"sdia.ge."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return ge_forward(x, p, cfg);
                             }));
  cases.push_back({"sdia_combine",
                   [](Rng& rng) {
                     return std::vector<TensorD>{
                         uniform_tensor({2, 3, 4, 4}, rng, 0, 1),
                         uniform_tensor({2, 3, 4, 4}, rng, 0, 1),
                         uniform_tensor({2, 1}, rng, 0.5, 2)};
                   },
                   [](Inputs in) { return sdia_combine(in[0], in[1], in[2]); },
                   {}});
  cases.push_back(model_case("sdia", image, 0.0, 1.0, cfg, {"sdia."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return sdia_forward(x, p, cfg);
                             }));
  cases.push_back(model_case("eca", features, -1.0, 1.0, cfg, {"gisp.eca."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return eca_forward(x, p, cfg);
                             }));
  cases.push_back(model_case("df", features, -1.0, 1.0, cfg, {"gisp.df0."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return df_forward(x, p, cfg, 0);
                             }));
  cases.push_back(model_case("gisp", image, 0.0, 1.0, cfg, {"gisp."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return gisp_forward(x, p, cfg);
                             }));
  cases.back().options.joint_coords = 256;
  cases.push_back(model_case("flight", image, 0.0, 1.0, cfg, {"sdia.", "gisp."},
                             [cfg](const VarD& x, const ParamVars<double>& p) {
                               return flight_forward(x, p, cfg);
                             }));
  cases.back().options.joint_coords = 256;

  cases.push_back({"smooth_l1",
                   [](Rng& rng) {
                     return std::vector<TensorD>{
                         uniform_tensor({2, 3, 4, 4}, rng, -2, 2),
                         uniform_tensor({2, 3, 4, 4}, rng, -2, 2)};
                   },
                   [](Inputs in) { return smooth_l1(in[0], in[1], 1.0); },
                   {}});
  constexpr double kImageLossEps = 3e-4;
  cases.push_back({"ssim", [](Rng& rng) { return image_pair(rng, {1, 3, 16, 16}); },
                   [](Inputs in) { return ssim(in[0], in[1]); }, {}, kImageLossEps});
  cases.push_back({"ms_ssim", [](Rng& rng) { return image_pair(rng, {1, 3, 24, 24}); },
                   [](Inputs in) { return ms_ssim(in[0], in[1]); }, {},
                   kImageLossEps});
  cases.push_back({"total_loss",
                   [](Rng& rng) { return image_pair(rng, {1, 3, 24, 24}); },
                   [](Inputs in) { return total_loss(in[0], in[1], LossWeights{}); },
                   {}, kImageLossEps});

  // Network plus training loss, with respect to the parameters only.
  {
    std::vector<std::string> names;
    for (const auto& spec : param_layout(cfg)) names.push_back(spec.name);
    Case e2e;
    e2e.op = "end_to_end";
    e2e.make_point = [cfg, names](Rng& rng) {
      auto pair = image_pair(rng, {1, 3, 24, 24});
      std::vector<TensorD> point{pair[0], pair[1]};
      const auto store = init_params(cfg, rng()).cast<double>();
      for (const auto& name : names) {
        TensorD value = store.value(name);
        if (value.rank() == 1) {
          for (double& v : value.data()) v = uniform(rng, -0.1, 0.1);
        }
        point.push_back(std::move(value));
      }
      return point;
    };
    e2e.fn = [cfg, names](Inputs in) {
      ParamVars<double> vars;
      for (std::size_t i = 0; i < names.size(); ++i) vars.set(names[i], in[i + 2]);
      return total_loss(flight_forward(in[0], vars, cfg), in[1], LossWeights{});
    };
    e2e.options.joint_coords = 128;
    e2e.options.threshold = options.end_to_end_threshold;
    cases.push_back(std::move(e2e));
  }

  for (auto& c : cases) {
    c.options.eps = c.eps > 0.0 ? c.eps : options.eps;
    if (c.op != "end_to_end") c.options.threshold = options.op_threshold;
  }
  return cases;
}

}  // namespace

std::vector<GradCheckReport> run_gradcheck_suite(
    const GradCheckSuiteOptions& options,
    const std::function<void(const GradCheckReport&)>& progress) {
  std::vector<GradCheckReport> reports;
  std::uint64_t case_index = 0;
  for (auto& c : build_cases(options)) {
    Rng rng = make_rng(options.seed, 0x600 + case_index++);
    GradCheckReport merged;
    merged.op = c.op;
    merged.threshold = c.options.threshold;
    for (int p = 0; p < options.points; ++p) {
      GradCheckOptions opts = c.options;
      opts.seed = rng();
      merged.merge(finite_diff_check(c.op, c.fn, c.make_point(rng), opts));
    }
    if (progress) progress(merged);
    reports.push_back(std::move(merged));
  }
  return reports;
}

std::string format_report(const GradCheckReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-24s max_rel_error=%.3e threshold=%.0e points=%lld coords=%lld "
                "skipped=%lld %s",
                r.op.c_str(), r.max_rel_error, r.threshold,
                static_cast<long long>(r.points), static_cast<long long>(r.coords),
                static_cast<long long>(r.skipped),
                r.passed() ? "PASS" : (r.valid ? "FAIL" : "INVALID"));
  return buf;
}

}  // namespace flight
