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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "flight/model.h"
#include "flight/random.h"

namespace flight {
namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Linear decay from `start` to start / 10 across [flat, total - 1].
double schedule(std::int64_t epoch, std::int64_t flat, std::int64_t total,
                double start) {
  if (epoch < flat) return start;
  const double span = static_cast<double>(total - 1 - flat);
  if (span <= 0.0) return start / 10.0;
  const double t = static_cast<double>(epoch - flat) / span;
  return start + (start / 10.0 - start) * t;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr_initial > 0.0)) throw std::invalid_argument("lr_initial must be > 0");
  if (finetune && !(finetune_lr > 0.0)) {
    throw std::invalid_argument("finetune_lr must be > 0");
  }
  if (epochs_flat < 0 || epochs_flat >= epochs_total) {
    throw std::invalid_argument("need 0 <= epochs_flat < epochs_total");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
  if (crop < 0) throw std::invalid_argument("crop must be >= 0");
  if (val_every < 0) throw std::invalid_argument("val_every must be >= 0");
  if (checkpoint_every < 0) {
    throw std::invalid_argument("checkpoint_every must be >= 0");
  }
  loss.validate();
}

AdamWConfig TrainConfig::adamw() const {
  return {adam_beta1, adam_beta2, adam_eps, weight_decay};
}

std::int64_t TrainConfig::run_epochs() const {
  return finetune ? 2 * epochs_total : epochs_total;
}

double lr_at(std::int64_t epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs_total) {
    throw std::out_of_range("epoch " + std::to_string(epoch) +
                            " outside [0, " + std::to_string(cfg.epochs_total) +
                            ")");
  }
  return schedule(epoch, cfg.epochs_flat, cfg.epochs_total, cfg.lr_initial);
}

double run_lr_at(std::int64_t epoch, const TrainConfig& cfg) {
  if (epoch < cfg.epochs_total) return lr_at(epoch, cfg);
  if (!cfg.finetune || epoch >= cfg.run_epochs()) {
    throw std::out_of_range("epoch " + std::to_string(epoch) +
                            " is past the end of the run");
  }
  return schedule(epoch - cfg.epochs_total, cfg.epochs_flat, cfg.epochs_total,
                  cfg.finetune_lr);
}

std::string log_csv_header() { return "epoch,lr,mean_loss,val_psnr,val_ssim"; }

std::string log_csv_row(const EpochLog& row) {
  std::string out = std::to_string(row.epoch) + "," + format_real(row.lr) + "," +
                    format_real(row.mean_loss) + ",";
  if (row.val_psnr) out += format_real(*row.val_psnr);
  out += ",";
  if (row.val_ssim) out += format_real(*row.val_ssim);
  return out;
}

void write_log_csv(std::span<const EpochLog> rows,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write log " + path.string());
  out << log_csv_header() << "\n";
  for (const auto& row : rows) out << log_csv_row(row) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

TrainState init_train_state(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg) {
  TrainState state;
  state.params = init_params(model_cfg, train_cfg.seed, train_cfg.ablation);
  state.opt = init_opt_state(state.params);
  return state;
}

std::vector<EpochLog> train_until(TrainState& state,
                                  const ModelConfig& model_cfg,
                                  const TrainConfig& cfg,
                                  std::span<const ImagePair> train_pairs,
                                  std::span<const ImagePair> val_pairs,
                                  std::int64_t until_epoch,
                                  const TrainHooks& hooks) {
  model_cfg.validate();
  cfg.validate();
  if (train_pairs.empty()) throw std::invalid_argument("training set is empty");
  if (until_epoch > cfg.run_epochs()) {
    throw std::out_of_range("until_epoch " + std::to_string(until_epoch) +
                            " exceeds run length " +
                            std::to_string(cfg.run_epochs()));
  }
  for (const auto& p : train_pairs) {
    if (cfg.crop > std::min(p.low.dim(2), p.low.dim(3))) {
      throw DatasetError("crop " + std::to_string(cfg.crop) +
                         " exceeds the extent of pair '" + p.id + "'");
    }
  }
  const std::span<const ImagePair> val = val_pairs.empty() ? train_pairs : val_pairs;
  const AdamWConfig adamw = cfg.adamw();
  const std::size_t n = train_pairs.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<EpochLog> log;
  while (state.epoch < until_epoch) {
    const std::int64_t epoch = state.epoch;
    if (cfg.finetune && epoch == cfg.epochs_total) {
      state.opt = init_opt_state(state.params);
    }
    const double lr = run_lr_at(epoch, cfg);
    Rng rng = make_rng(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }

    double loss_sum = 0.0;
    std::int64_t step = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++step) {
      const std::size_t end = std::min(n, begin + batch);
      std::vector<ImagePair> items;
      items.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        items.push_back(random_crop_flip(train_pairs[order[i]], cfg.crop, rng,
                                         cfg.hflip));
      }
      auto [low, high] = stack_batch(items);

      ag::Tape<float> tape;
      state.params.zero_grad();
      ParamVars<float> vars = bind_params(tape, state.params, true);
      auto pred = model_forward(tape.constant(std::move(low)), vars, model_cfg,
                                cfg.ablation);
      auto loss = total_loss(pred, tape.constant(std::move(high)), cfg.loss);
      const double value = loss.value()[0];
      const std::string where = "epoch " + std::to_string(epoch) + ", step " +
                                std::to_string(step);
      if (!std::isfinite(value)) {
        throw NonFiniteError("non-finite loss at " + where);
      }
      tape.backward(loss);
      try {
        adamw_step(state.params, state.opt, lr, adamw);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError(std::string(e.what()) + " at " + where);
      }
      loss_sum += value * static_cast<double>(end - begin);
    }

    EpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    row.mean_loss = loss_sum / static_cast<double>(n);
    const bool last = epoch + 1 == cfg.run_epochs();
    if ((cfg.val_every > 0 && (epoch + 1) % cfg.val_every == 0) || last) {
      const EvalSummary s = evaluate(state.params, model_cfg, cfg.ablation, val);
      row.val_psnr = s.mean_psnr;
      row.val_ssim = s.mean_ssim;
    }
    log.push_back(row);
    state.epoch = epoch + 1;
    if (hooks.on_epoch) hooks.on_epoch(row);
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 &&
        state.epoch % cfg.checkpoint_every == 0) {
      hooks.on_checkpoint(state);
    }
  }
  return log;
}

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  std::span<const ImagePair> train_pairs,
                  std::span<const ImagePair> val_pairs, const TrainHooks& hooks) {
  model_cfg.validate();
  train_cfg.validate();
  TrainState state = init_train_state(model_cfg, train_cfg);
  TrainResult result;
  result.log = train_until(state, model_cfg, train_cfg, train_pairs, val_pairs,
                           train_cfg.run_epochs(), hooks);
  result.params = std::move(state.params);
  return result;
}

namespace {

EvalSummary summarize(std::vector<EvalRow> rows) {
  EvalSummary s;
  for (const auto& r : rows) {
    s.mean_psnr += r.score.psnr;
    s.mean_ssim += r.score.ssim;
  }
  if (!rows.empty()) {
    s.mean_psnr /= static_cast<double>(rows.size());
    s.mean_ssim /= static_cast<double>(rows.size());
  }
  s.rows = std::move(rows);
  return s;
}

}  // namespace

EvalSummary evaluate(const ParamStore& params, const ModelConfig& cfg,
                     ModelVariant variant, std::span<const ImagePair> pairs) {
  std::vector<EvalRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    // Only the low image reaches the network.
    const Tensor pred = enhance(params, cfg, variant, p.low);
    rows.push_back({p.id, score_image(pred, p.high)});
  }
  return summarize(std::move(rows));
}

EvalSummary score_pairs(std::span<const ImagePair> pairs) {
  std::vector<EvalRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back({p.id, score_image(p.low, p.high)});
  return summarize(std::move(rows));
}

}  // namespace flight
