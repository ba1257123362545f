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

#include "flight/model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "flight/grad_ops.h"
#include "flight/gradcheck.h"
#include "flight/params.h"
#include "oracles.h"

namespace flight {
namespace {

using testing::random_tensor;

ParamStore zero_params(const ModelConfig& cfg,
                       ModelVariant variant = ModelVariant::kFull) {
  ParamStore p = init_params(cfg, 0, variant);
  for (auto& e : p.entries()) e.value.fill(0.0f);
  return p;
}

Tensor random_image(const Shape& shape, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_tensor(shape, rng, 0.0, 1.0);
}

// Runs `fn` on a non-recording tape and returns the value.
template <typename Fn>
Tensor eval(const ParamStore& params, const Tensor& input, Fn fn) {
  ag::Tape<float> tape(false);
  auto vars = bind_params(tape, params);
  return fn(tape.constant(input), vars).value();
}

TEST(ParamCountTest, DefaultConfigBudget) {
  const ModelConfig cfg;
  const auto params = init_params(cfg, 0);
  EXPECT_EQ(param_count(params), 24296);
  EXPECT_GE(param_count(params), 20000);
  EXPECT_LE(param_count(params), 30000);

  std::map<std::string, std::int64_t> per_block;
  for (const auto& spec : param_layout(cfg)) {
    per_block[spec.block] += shape_numel(spec.shape);
  }
  EXPECT_EQ(per_block["sdia.ime"], 1438);
  EXPECT_EQ(per_block["sdia.ge"], 1777);
  EXPECT_EQ(per_block["gisp.head"], 3552);
  EXPECT_EQ(per_block["gisp.eca"], 318);
  EXPECT_EQ(per_block["gisp.df0"], 5520);
  EXPECT_EQ(per_block["gisp.df1"], 5520);
  EXPECT_EQ(per_block["gisp.df2"], 5520);
  EXPECT_EQ(per_block["gisp.tail"], 651);
}

TEST(ParamCountTest, MonotoneInWidthAndEmptyIsZero) {
  ModelConfig cfg;
  const auto base = param_count(init_params(cfg, 0));
  cfg.gisp_channels *= 2;
  EXPECT_GT(param_count(init_params(cfg, 0)), base);
  EXPECT_EQ(param_count(ParamStore{}), 0);
}

TEST(ParamCountTest, AblationVariantsPartitionTheFullModel) {
  const ModelConfig cfg;
  const auto full = param_count(init_params(cfg, 0));
  const auto sdia = param_count(init_params(cfg, 0, ModelVariant::kSdiaOnly));
  const auto gisp = param_count(init_params(cfg, 0, ModelVariant::kGispOnly));
  EXPECT_EQ(sdia + gisp, full);
  const auto sdia_store = init_params(cfg, 0, ModelVariant::kSdiaOnly);
  for (const auto& e : sdia_store.entries()) {
    EXPECT_EQ(e.name.rfind("sdia.", 0), 0u) << e.name;
  }
}

TEST(ModelConfigTest, Validation) {
  ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gisp_channels = 23;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eca_reduction = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.celu_alpha = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_variant("sdia"), ModelVariant::kSdiaOnly);
  EXPECT_EQ(parse_variant("gisp_only"), ModelVariant::kGispOnly);
  EXPECT_THROW(parse_variant("half"), std::invalid_argument);
}

TEST(InitTest, SeededDeterministicWithZeroBiases) {
  const ModelConfig cfg;
  const auto a = init_params(cfg, 42);
  const auto b = init_params(cfg, 42);
  const auto c = init_params(cfg, 43);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.entries()[i].value, b.entries()[i].value);
    differs |= a.entries()[i].value != c.entries()[i].value;
  }
  EXPECT_TRUE(differs);

  double sum = 0.0;
  std::int64_t count = 0;
  const auto layout = param_layout(cfg);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& value = a.entries()[i].value;
    EXPECT_EQ(a.entries()[i].name, layout[i].name);
    if (layout[i].is_bias) {
      for (float v : value.data()) EXPECT_EQ(v, 0.0f);
      continue;
    }
    const double bound = std::sqrt(6.0 / layout[i].fan_in);
    for (float v : value.data()) {
      EXPECT_LE(std::abs(v), bound);
      sum += v;
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 0.0, 0.02);
}

TEST(ParamStoreTest, UniqueNamesAndGradientShapes) {
  auto p = init_params(ModelConfig{}, 0);
  for (const auto& e : p.entries()) EXPECT_EQ(e.grad.shape(), e.value.shape());
  EXPECT_THROW(p.add("gisp.tail.conv.bias", Tensor({3})), std::invalid_argument);
  EXPECT_THROW(p.value("missing"), std::out_of_range);
}

TEST(ImeTest, RangeZeroParamsAndShape) {
  const ModelConfig cfg;
  auto fn = [&](const ag::Var<float>& x, const ParamVars<float>& p) {
    return ime_forward(x, p, cfg);
  };
  const auto img = random_image({2, 3, 64, 64}, 1);
  const auto im = eval(init_params(cfg, 5), img, fn);
  EXPECT_EQ(im.shape(), img.shape());
  for (float v : im.data()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
  const auto out = eval(zero_params(cfg), img, fn);
  for (float v : out.data()) EXPECT_EQ(v, 0.5f);
  EXPECT_THROW(eval(zero_params(cfg), Tensor({1, 4, 8, 8}), fn), ShapeError);
}

TEST(GeTest, PositiveAndSoftplusOfZero) {
  const ModelConfig cfg;
  auto fn = [&](const ag::Var<float>& x, const ParamVars<float>& p) {
    return ge_forward(x, p, cfg);
  };
  const auto img = random_image({3, 3, 16, 20}, 2);
  const auto g = eval(init_params(cfg, 7), img, fn);
  EXPECT_EQ(g.shape(), (Shape{3, 1}));
  for (float v : g.data()) EXPECT_GT(v, 0.0f);
  const auto out = eval(zero_params(cfg), img, fn);
  for (float v : out.data()) {
    EXPECT_NEAR(v, std::log(2.0), 1e-6);
  }
  EXPECT_THROW(eval(zero_params(cfg), Tensor({1, 3, 6, 9}), fn), ShapeError);
}

TEST(SdiaTest, CombineIdentityAndBilinearity) {
  const auto lli = random_image({2, 3, 4, 4}, 3);
  ag::Tape<float> tape(false);
  auto x = tape.constant(lli);
  auto ones = tape.constant(Tensor(lli.shape(), 1.0f));
  EXPECT_EQ(sdia_combine(x, ones, tape.constant(Tensor({2, 1}, 1.0f))).value(), lli);

  const auto im = tape.constant(random_image(lli.shape(), 4));
  const auto once = sdia_combine(x, im, tape.constant(Tensor({2, 1}, {0.7f, 1.3f})));
  const auto twice = sdia_combine(x, im, tape.constant(Tensor({2, 1}, {1.4f, 2.6f})));
  for (std::int64_t i = 0; i < lli.size(); ++i) {
    EXPECT_FLOAT_EQ(twice.value()[i], 2.0f * once.value()[i]);
  }
}

TEST(SdiaTest, ZeroInputGivesZeroLatent) {
  const ModelConfig cfg;
  const auto latent = eval(init_params(cfg, 9), Tensor({1, 3, 12, 12}, 0.0f),
                           [&](const ag::Var<float>& x, const ParamVars<float>& p) {
                             return sdia_forward(x, p, cfg);
                           });
  for (float v : latent.data()) EXPECT_EQ(v, 0.0f);
}

TEST(EcaTest, ZeroMlpHalvesInput) {
  const ModelConfig cfg;
  Rng rng = make_rng(5);
  const auto x = random_tensor({2, cfg.gisp_channels, 5, 5}, rng);
  const auto y = eval(zero_params(cfg), x,
                      [&](const ag::Var<float>& v, const ParamVars<float>& p) {
                        return eca_forward(v, p, cfg);
                      });
  for (std::int64_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], 0.5f * x[i]);
}

TEST(EcaTest, ContractionUnderRandomParams) {
  const ModelConfig cfg;
  Rng rng = make_rng(6);
  const auto x = random_tensor({2, cfg.gisp_channels, 6, 6}, rng, -3.0, 3.0);
  const auto y = eval(init_params(cfg, 11), x,
                      [&](const ag::Var<float>& v, const ParamVars<float>& p) {
                        return eca_forward(v, p, cfg);
                      });
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_LE(std::abs(y[i]), std::abs(x[i]));
  }
}

TEST(EcaTest, ChannelPermutationEquivariance) {
  const ModelConfig cfg;
  const auto c = cfg.gisp_channels;
  const auto hidden = c / cfg.eca_reduction;
  Rng rng = make_rng(7);
  const auto x = random_tensor({1, c, 4, 4}, rng);
  auto params = init_params(cfg, 13);
  for (auto& e : params.entries()) {
    if (e.name.find("eca") != std::string::npos && e.name.find("bias") != std::string::npos) {
      e.value = random_tensor(e.value.shape(), rng);
    }
  }
  const std::int64_t i = 2, j = 17;

  Tensor xp = x;
  for (std::int64_t h = 0; h < 4; ++h) {
    for (std::int64_t w = 0; w < 4; ++w) std::swap(xp.at(0, i, h, w), xp.at(0, j, h, w));
  }
  auto permuted = params;
  auto& fc1 = permuted.value("gisp.eca.fc1.weight");  // hidden x C: swap columns
  for (std::int64_t r = 0; r < hidden; ++r) std::swap(fc1[r * c + i], fc1[r * c + j]);
  auto& fc2 = permuted.value("gisp.eca.fc2.weight");  // C x hidden: swap rows
  for (std::int64_t k = 0; k < hidden; ++k) std::swap(fc2[i * hidden + k], fc2[j * hidden + k]);
  auto& b2 = permuted.value("gisp.eca.fc2.bias");
  std::swap(b2[i], b2[j]);

  auto fn = [&](const ag::Var<float>& v, const ParamVars<float>& p) {
    return eca_forward(v, p, cfg);
  };
  const auto y = eval(params, x, fn);
  const auto yp = eval(permuted, xp, fn);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const auto src = ch == i ? j : (ch == j ? i : ch);
    for (std::int64_t h = 0; h < 4; ++h) {
      for (std::int64_t w = 0; w < 4; ++w) {
        EXPECT_NEAR(yp.at(0, ch, h, w), y.at(0, src, h, w), 1e-6);
      }
    }
  }
}

TEST(DfTest, ZeroParamsIsPureResidual) {
  const ModelConfig cfg;
  Rng rng = make_rng(8);
  const auto x = random_tensor({2, cfg.gisp_channels, 7, 5}, rng);
  const auto y = eval(zero_params(cfg), x,
                      [&](const ag::Var<float>& v, const ParamVars<float>& p) {
                        return df_forward(v, p, cfg, 1);
                      });
  EXPECT_EQ(y, x);
}

TEST(DfTest, IdentityPathGradientIsExactlyOneAtZeroParams) {
  ModelConfig cfg;
  cfg.gisp_channels = 8;
  cfg.eca_reduction = 2;
  auto params = zero_params(cfg).cast<double>();
  Rng rng = make_rng(9);
  std::vector<TensorD> point = {testing::random_tensor_d({1, 8, 5, 5}, rng)};
  const auto fn = [&](std::span<const ag::Var<double>> in) {
    auto vars = bind_params(*in[0].tape(), params);
    return ag::sum(df_forward(in[0], vars, cfg, 0));
  };
  ag::Tape<double> tape;
  auto x = tape.leaf(point[0]);
  tape.backward(fn(std::span<const ag::Var<double>>(&x, 1)));
  const auto grad = x.grad();
  for (double g : grad.data()) EXPECT_EQ(g, 1.0);
  EXPECT_LT(finite_diff_check("df_zero", fn, point).max_rel_error, 1e-6);
}

TEST(DfTest, RejectsOddChannels) {
  ModelConfig cfg;
  EXPECT_THROW(eval(zero_params(cfg), Tensor({1, 5, 4, 4}),
                    [&](const ag::Var<float>& v, const ParamVars<float>& p) {
                      return df_forward(v, p, cfg, 0);
                    }),
               ShapeError);
}

TEST(GispTest, RangeZeroParamsAndShape) {
  const ModelConfig cfg;
  auto fn = [&](const ag::Var<float>& x, const ParamVars<float>& p) {
    return gisp_forward(x, p, cfg);
  };
  Rng rng = make_rng(10);
  const auto latent = random_tensor({2, 3, 9, 11}, rng, -2.0, 4.0);
  const auto out = eval(init_params(cfg, 3), latent, fn);
  EXPECT_EQ(out.shape(), latent.shape());
  // Closed interval: a float sigmoid rounds to exactly 1 above ~17.
  for (float v : out.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  const auto zero_out = eval(zero_params(cfg), latent, fn);
  for (float v : zero_out.data()) EXPECT_EQ(v, 0.5f);
}

TEST(GispTest, ZeroDfAndEcaReducesToHandWiredComposition) {
  const ModelConfig cfg;
  auto params = init_params(cfg, 21);
  for (auto& e : params.entries()) {
    if (e.name.rfind("gisp.df", 0) == 0 || e.name.rfind("gisp.eca", 0) == 0) {
      e.value.fill(0.0f);
    }
  }
  Rng rng = make_rng(11);
  const auto latent = random_tensor({1, 3, 10, 10}, rng, 0.0, 1.0);
  const auto got = eval(params, latent,
                        [&](const ag::Var<float>& x, const ParamVars<float>& p) {
                          return gisp_forward(x, p, cfg);
                        });

  const auto c = cfg.gisp_channels;
  auto h = activation(conv2d(latent, params.value("gisp.head.conv.weight"),
                             params.value("gisp.head.conv.bias"),
                             conv_spec(c, 3, 7)),
                      Activation::kCelu, cfg.celu_alpha);
  h = broadcast_mul(h, Tensor::scalar(0.5f));
  const auto want = activation(conv2d(h, params.value("gisp.tail.conv.weight"),
                                      params.value("gisp.tail.conv.bias"),
                                      conv_spec(3, c, 3)),
                               Activation::kSigmoid);
  ASSERT_EQ(got.shape(), want.shape());
  for (std::int64_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
}

TEST(FlightTest, DeterministicShapePreservingAndInRange) {
  const ModelConfig cfg;
  const auto params = init_params(cfg, 17);
  for (auto [h, w] : {std::pair<std::int64_t, std::int64_t>{8, 8}, {9, 13}, {32, 24}}) {
    const auto img = random_image({2, 3, h, w}, 12);
    const auto a = enhance(params, cfg, ModelVariant::kFull, img);
    const auto b = enhance(params, cfg, ModelVariant::kFull, img);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.shape(), img.shape());
    for (float v : a.data()) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
    }
  }
}

TEST(FlightTest, VariantsDispatch) {
  const ModelConfig cfg;
  const auto img = random_image({1, 3, 12, 12}, 13);
  const auto full = init_params(cfg, 1);
  ParamStore sdia, gisp;
  for (const auto& e : full.entries()) {
    (e.name.rfind("sdia.", 0) == 0 ? sdia : gisp).add(e.name, e.value);
  }
  const auto latent = eval(full, img, [&](const ag::Var<float>& x, const ParamVars<float>& p) {
    return sdia_forward(x, p, cfg);
  });
  EXPECT_EQ(enhance(sdia, cfg, ModelVariant::kSdiaOnly, img), latent);
  const auto direct = eval(full, img, [&](const ag::Var<float>& x, const ParamVars<float>& p) {
    return gisp_forward(x, p, cfg);
  });
  EXPECT_EQ(enhance(gisp, cfg, ModelVariant::kGispOnly, img), direct);
  EXPECT_THROW(enhance(sdia, cfg, ModelVariant::kFull, img), std::out_of_range);
}

}  // namespace
}  // namespace flight
