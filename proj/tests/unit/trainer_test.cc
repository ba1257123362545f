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

#include "flight/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "flight/checkpoint.h"
#include "temp_dir.h"

namespace flight {
namespace {

TEST(ScheduleTest, Endpoints) {
  const TrainConfig cfg;
  EXPECT_EQ(lr_at(0, cfg), 8e-4);
  EXPECT_EQ(lr_at(5999, cfg), 8e-4);
  EXPECT_EQ(lr_at(6000, cfg), 8e-4);
  EXPECT_NEAR(lr_at(11999, cfg), 8e-5, 1e-18);
  EXPECT_THROW(lr_at(-1, cfg), std::out_of_range);
  EXPECT_THROW(lr_at(12000, cfg), std::out_of_range);
}

TEST(ScheduleTest, LinearAtInteriorEpochs) {
  const TrainConfig cfg;
  for (std::int64_t epoch : {6001, 6500, 7000, 7777, 8500, 9000, 9999, 10500,
                             11111, 11998}) {
    const double t = (epoch - 6000) / 5999.0;
    EXPECT_NEAR(lr_at(epoch, cfg), 8e-4 + (8e-5 - 8e-4) * t, 1e-12) << epoch;
  }
}

TEST(ScheduleTest, MidpointValue) {
  const TrainConfig cfg;
  const double v = lr_at(9000, cfg);
  EXPECT_NEAR(v, 8e-4 - 7.2e-4 * 3000.0 / 5999.0, 1e-15);
  // Within rounding of the commonly quoted approximation 4.4001e-4.
  EXPECT_NEAR(v / 4.4001e-4, 1.0, 2e-4);
}

TEST(ScheduleTest, NonIncreasingAndContinuousAtKnee) {
  TrainConfig cfg;
  cfg.epochs_flat = 20;
  cfg.epochs_total = 50;
  double previous = lr_at(0, cfg);
  for (std::int64_t e = 1; e < 50; ++e) {
    EXPECT_LE(lr_at(e, cfg), previous);
    previous = lr_at(e, cfg);
  }
  EXPECT_NEAR(lr_at(21, cfg) - lr_at(20, cfg), -(cfg.lr_initial * 0.9) / 29.0, 1e-15);
}

TEST(ScheduleTest, FinetuneRunRestartsAtItsOwnRate) {
  TrainConfig cfg;
  cfg.epochs_flat = 4;
  cfg.epochs_total = 10;
  cfg.finetune = true;
  EXPECT_EQ(cfg.run_epochs(), 20);
  EXPECT_EQ(run_lr_at(9, cfg), lr_at(9, cfg));
  EXPECT_EQ(run_lr_at(10, cfg), 4e-4);
  EXPECT_NEAR(run_lr_at(19, cfg), 4e-5, 1e-18);
  EXPECT_THROW(run_lr_at(20, cfg), std::out_of_range);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.epochs_flat = cfg.epochs_total;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lr_initial = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(LogTest, CsvRows) {
  EXPECT_EQ(log_csv_header(), "epoch,lr,mean_loss,val_psnr,val_ssim");
  EpochLog row{3, 8e-4, 0.125, std::nullopt, std::nullopt};
  EXPECT_EQ(log_csv_row(row), "3,0.0008,0.125,,");
  row.val_psnr = 25.5;
  row.val_ssim = 0.75;
  EXPECT_EQ(log_csv_row(row), "3,0.0008,0.125,25.5,0.75");
}

// Tiny problem: 4 pairs of 16x16, two batches per epoch (one partial).
struct Tiny {
  ModelConfig model;
  TrainConfig train;
  std::vector<ImagePair> pairs = make_synthetic_fixture(3, 16, 4);

  Tiny() {
    model.gisp_channels = 8;
    model.df_blocks = 1;
    model.eca_reduction = 2;
    train.batch_size = 2;
    train.crop = 12;
    train.epochs_flat = 4;
    train.epochs_total = 8;
    train.val_every = 4;
    train.seed = 17;
  }
};

void expect_same_params(const ParamStore& a, const ParamStore& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.entries()[i].value, b.entries()[i].value) << a.entries()[i].name;
  }
}

TEST(TrainTest, FixedSeedIsBitReproducible) {
  Tiny t;
  const auto a = train(t.model, t.train, t.pairs);
  const auto b = train(t.model, t.train, t.pairs);
  expect_same_params(a.params, b.params);
  ASSERT_EQ(a.log.size(), 8u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].mean_loss, b.log[i].mean_loss);
    EXPECT_EQ(a.log[i].lr, lr_at(static_cast<std::int64_t>(i), t.train));
  }
  EXPECT_TRUE(a.log[3].val_psnr.has_value());
  EXPECT_FALSE(a.log[4].val_psnr.has_value());
  EXPECT_TRUE(a.log[7].val_psnr.has_value());

  Tiny other;
  other.train.seed = 18;
  const auto c = train(other.model, other.train, other.pairs);
  EXPECT_NE(c.log.back().mean_loss, a.log.back().mean_loss);
}

TEST(TrainTest, ResumeFromCheckpointMatchesUninterruptedRun) {
  Tiny t;
  testing::TempDir dir;
  const auto full = train(t.model, t.train, t.pairs);

  TrainState state = init_train_state(t.model, t.train);
  train_until(state, t.model, t.train, t.pairs, {}, 3);
  save_checkpoint(state, t.model, t.train.ablation, dir / "ckpt.flwt");
  const auto resumed = load_checkpoint(dir / "ckpt.flwt");
  TrainState second = resumed.state;
  EXPECT_EQ(second.epoch, 3);
  EXPECT_EQ(second.opt.step, 6);  // two steps per epoch
  const auto tail = train_until(second, t.model, t.train, t.pairs, {}, 8);
  ASSERT_EQ(tail.size(), 5u);
  EXPECT_EQ(tail.back().mean_loss, full.log.back().mean_loss);
  expect_same_params(second.params, full.params);
}

TEST(TrainTest, CheckpointHookCadence) {
  Tiny t;
  t.train.checkpoint_every = 3;
  std::vector<std::int64_t> seen;
  TrainHooks hooks;
  hooks.on_checkpoint = [&](const TrainState& s) { seen.push_back(s.epoch); };
  train(t.model, t.train, t.pairs, {}, hooks);
  EXPECT_EQ(seen, (std::vector<std::int64_t>{3, 6}));
}

TEST(TrainTest, AblationStoresOnlyTheirStage) {
  Tiny t;
  t.train.epochs_flat = 1;
  t.train.epochs_total = 2;
  t.train.ablation = ModelVariant::kSdiaOnly;
  const auto r = train(t.model, t.train, t.pairs);
  for (const auto& e : r.params.entries()) EXPECT_EQ(e.name.rfind("sdia.", 0), 0u);
  t.train.ablation = ModelVariant::kGispOnly;
  const auto g = train(t.model, t.train, t.pairs);
  for (const auto& e : g.params.entries()) {
    EXPECT_EQ(e.name.rfind("gisp.", 0), 0u);
  }
}

TEST(TrainTest, NonFiniteLossReportsEpochAndStep) {
  Tiny t;
  auto pairs = t.pairs;
  pairs[1].low[5] = std::numeric_limits<float>::quiet_NaN();
  t.train.crop = 0;
  t.train.hflip = false;
  try {
    train(t.model, t.train, pairs);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0, step "), std::string::npos) << e.what();
  }
}

TEST(TrainTest, RejectsOversizedCropAndEmptySet) {
  Tiny t;
  t.train.crop = 32;
  EXPECT_THROW(train(t.model, t.train, t.pairs), DatasetError);
  t.train.crop = 0;
  EXPECT_THROW(train(t.model, t.train, std::span<const ImagePair>{}),
               std::invalid_argument);
}

TEST(EvaluateTest, ScoresOnlyFromTheLowImage) {
  Tiny t;
  const auto params = init_params(t.model, 1);
  auto pairs = t.pairs;
  const auto a = evaluate(params, t.model, ModelVariant::kFull, pairs);
  // Changing the reference changes the score; the prediction is unchanged.
  for (auto& v : pairs[0].high.data()) v = 1.0f - v;
  const auto b = evaluate(params, t.model, ModelVariant::kFull, pairs);
  EXPECT_NE(a.rows[0].score.psnr, b.rows[0].score.psnr);
  EXPECT_EQ(a.rows[1].score.psnr, b.rows[1].score.psnr);
  EXPECT_NEAR(a.mean_psnr,
              (a.rows[0].score.psnr + a.rows[1].score.psnr + a.rows[2].score.psnr) / 3,
              1e-12);

  // Predictions are quantised before scoring, so use an 8-bit reference.
  const Tensor ref = quantize_8bit(pairs[2].high);
  std::vector<ImagePair> same = {{ref, ref, "x"}};
  EXPECT_EQ(score_pairs(same).mean_psnr, kPsnrCap);
}

}  // namespace
}  // namespace flight
