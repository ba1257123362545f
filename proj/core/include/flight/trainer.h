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

#ifndef FLIGHT_TRAINER_H_
#define FLIGHT_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flight/dataset.h"
#include "flight/loss.h"
#include "flight/metrics.h"
#include "flight/optim.h"
#include "flight/params.h"

namespace flight {

struct TrainConfig {
  std::int64_t batch_size = 16;
  double lr_initial = 8e-4;
  std::int64_t epochs_flat = 6000;   // constant-rate epochs
  std::int64_t epochs_total = 12000;
  // Optional second run of the same schedule shape starting at finetune_lr,
  // with a fresh optimizer state.
  bool finetune = false;
  double finetune_lr = 4e-4;
  double weight_decay = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t crop = 256;  // 0 trains on full frames
  bool hflip = true;
  std::uint64_t seed = 0;
  LossWeights loss;
  ModelVariant ablation = ModelVariant::kFull;
  std::int64_t val_every = 50;
  std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints

  void validate() const;
  AdamWConfig adamw() const;
  // epochs_total, doubled when the fine-tune run is enabled.
  std::int64_t run_epochs() const;
};

// Flat at lr_initial for epoch < epochs_flat, then linear down to
// lr_initial / 10 at epochs_total - 1.
double lr_at(std::int64_t epoch, const TrainConfig& cfg);

// Rate for an epoch of the whole run, covering the fine-tune phase.
double run_lr_at(std::int64_t epoch, const TrainConfig& cfg);

struct EpochLog {
  std::int64_t epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  std::optional<double> val_psnr;
  std::optional<double> val_ssim;
};

std::string log_csv_header();
std::string log_csv_row(const EpochLog& row);
void write_log_csv(std::span<const EpochLog> rows,
                   const std::filesystem::path& path);

// Everything needed to continue a run. `epoch` is the next epoch to execute.
struct TrainState {
  ParamStore params;
  OptState opt;
  std::int64_t epoch = 0;
};

TrainState init_train_state(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg);

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  // Called after each epoch that is a multiple of checkpoint_every.
  std::function<void(const TrainState&)> on_checkpoint;
};

// Runs epochs [state.epoch, until_epoch). Every epoch draws its shuffle and
// crops from make_rng(seed, 1000 + epoch), so stopping and resuming from a
// saved state reproduces an uninterrupted run bit for bit. Validation uses
// `val`, or the training pairs when `val` is empty.
std::vector<EpochLog> train_until(TrainState& state,
                                  const ModelConfig& model_cfg,
                                  const TrainConfig& train_cfg,
                                  std::span<const ImagePair> train_pairs,
                                  std::span<const ImagePair> val_pairs,
                                  std::int64_t until_epoch,
                                  const TrainHooks& hooks = {});

struct TrainResult {
  ParamStore params;
  std::vector<EpochLog> log;
};

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  std::span<const ImagePair> train_pairs,
                  std::span<const ImagePair> val_pairs = {},
                  const TrainHooks& hooks = {});

struct EvalRow {
  std::string id;
  ImageScore score;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

// Enhances every low image and scores the 8-bit result against its high.
EvalSummary evaluate(const ParamStore& params, const ModelConfig& cfg,
                     ModelVariant variant, std::span<const ImagePair> pairs);

// Scores each low image directly against its high image, for predictions
// that were produced elsewhere.
EvalSummary score_pairs(std::span<const ImagePair> pairs);

}  // namespace flight

#endif  // FLIGHT_TRAINER_H_
