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

#include "flight/config.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "temp_dir.h"

namespace flight {
namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, ParsesKeysCommentsAndBlanks) {
  RunConfig cfg;
  apply_config_text(cfg,
                    "# training\n"
                    "\n"
                    "batch_size = 4   # small\n"
                    "  lr_initial=1e-3\n"
                    "gisp_channels = 16\n"
                    "hflip = off\n"
                    "ablation = sdia\n");
  EXPECT_EQ(cfg.train.batch_size, 4);
  EXPECT_EQ(cfg.train.lr_initial, 1e-3);
  EXPECT_EQ(cfg.model.gisp_channels, 16);
  EXPECT_FALSE(cfg.train.hflip);
  EXPECT_EQ(cfg.train.ablation, ModelVariant::kSdiaOnly);
}

TEST(ConfigTest, BooleanSpellings) {
  RunConfig cfg;
  for (const char* t : {"true", "on", "yes", "1"}) {
    cfg.train.finetune = false;
    apply_setting(cfg, "finetune", t);
    EXPECT_TRUE(cfg.train.finetune) << t;
  }
  for (const char* f : {"false", "off", "no", "0"}) {
    apply_setting(cfg, "finetune", f);
    EXPECT_FALSE(cfg.train.finetune) << f;
  }
  EXPECT_THROW(apply_setting(cfg, "finetune", "maybe"), ConfigError);
}

TEST(ConfigTest, ErrorsCarrySourceAndLine) {
  RunConfig cfg;
  auto msg = error_of([&] { apply_config_text(cfg, "crop = 64\nbogus = 1\n", "run.cfg"); });
  EXPECT_NE(msg.find("run.cfg:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown config key 'bogus'"), std::string::npos) << msg;

  msg = error_of([&] { apply_config_text(cfg, "\n\ncrop = sixty\n"); });
  EXPECT_NE(msg.find("<config>:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("crop"), std::string::npos) << msg;

  EXPECT_THROW(apply_config_text(cfg, "crop\n"), ConfigError);
  EXPECT_THROW(apply_config_text(cfg, "crop =\n"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "seed", "-3"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "ablation", "half"), ConfigError);
}

TEST(ConfigTest, TextRoundTripCoversEveryKey) {
  RunConfig cfg;
  cfg.model.df_blocks = 2;
  cfg.train.loss.alpha2 = 0.3;
  cfg.train.seed = 99;
  cfg.train.finetune = true;
  cfg.train.ablation = ModelVariant::kGispOnly;
  const std::string text = to_config_text(cfg);
  for (const auto& key : config_keys()) {
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
  }
  RunConfig back;
  apply_config_text(back, text);
  EXPECT_EQ(to_config_text(back), text);
  EXPECT_EQ(back.model, cfg.model);
  EXPECT_EQ(back.train.loss.alpha2, 0.3);
  EXPECT_EQ(back.train.ablation, ModelVariant::kGispOnly);
}

TEST(ConfigTest, FileLoading) {
  testing::TempDir dir;
  std::ofstream(dir / "a.cfg") << "epochs_total = 40\nepochs_flat = 20\n";
  RunConfig cfg;
  apply_config_file(cfg, dir / "a.cfg");
  EXPECT_EQ(cfg.train.epochs_total, 40);
  EXPECT_THROW(apply_config_file(cfg, dir / "none.cfg"), ConfigError);
}

TEST(ConfigTest, SeedFromEnvironment) {
  RunConfig cfg;
  ::setenv("FLIGHT_SEED", "1234", 1);
  apply_environment(cfg);
  EXPECT_EQ(cfg.train.seed, 1234u);
  ::setenv("FLIGHT_SEED", "abc", 1);
  EXPECT_THROW(apply_environment(cfg), ConfigError);
  ::unsetenv("FLIGHT_SEED");
  cfg.train.seed = 5;
  apply_environment(cfg);
  EXPECT_EQ(cfg.train.seed, 5u);
}

TEST(ConfigTest, ValidateWrapsSectionErrors) {
  RunConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.model.gisp_channels = 7;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.train.epochs_flat = 0;
  cfg.train.epochs_total = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

}  // namespace
}  // namespace flight
