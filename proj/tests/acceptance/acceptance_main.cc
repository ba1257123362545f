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

// Runs the acceptance criteria and prints one PASS/FAIL/SKIP line for each.
// Exit status is non-zero when any gating criterion fails. Criterion 9 needs
// the LOL-v1 evaluation split and trained weights, so it only runs when
// FLIGHT_LOL_EVAL_DIR and FLIGHT_LOL_WEIGHTS are set, and never gates.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.h"
#include "flight/checkpoint.h"
#include "flight/dataset.h"
#include "flight/gradcheck_suite.h"
#include "flight/loss.h"
#include "flight/metrics.h"
#include "flight/model.h"
#include "flight/trainer.h"
#include "flight/weight_file.h"
#include "../unit/oracles.h"

namespace flight {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fixture shared by the training criteria: 8 pairs of 32x32, one full batch
// per step, so 2000 epochs are 2000 optimizer steps.
TrainConfig fixture_train_config() {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.crop = 0;
  cfg.epochs_flat = 1000;
  cfg.epochs_total = 2000;
  cfg.val_every = 500;
  cfg.seed = 0;
  return cfg;
}

struct FixtureRun {
  std::string label;
  ModelVariant variant = ModelVariant::kFull;
  TrainResult result;
  EvalSummary train_eval;
  double seconds = 0.0;
};

FixtureRun run_fixture(const std::string& label, ModelVariant variant,
                       const LossWeights& loss, std::span<const ImagePair> pairs) {
  TrainConfig cfg = fixture_train_config();
  cfg.ablation = variant;
  cfg.loss = loss;
  FixtureRun run;
  run.label = label;
  run.variant = variant;
  const auto start = Clock::now();
  run.result = train(ModelConfig{}, cfg, pairs);
  run.train_eval = evaluate(run.result.params, ModelConfig{}, variant, pairs);
  run.seconds = seconds_since(start);
  std::string trajectory;
  for (const auto& row : run.result.log) {
    if (row.val_psnr) {
      trajectory += " " + std::to_string(row.epoch) + ":" + fmt("%.2f", *row.val_psnr);
    }
  }
  std::printf("  run %-11s psnr=%.3f dB ssim=%.5f final_loss=%.6f (%.1f s) val psnr by epoch%s\n",
              label.c_str(), run.train_eval.mean_psnr, run.train_eval.mean_ssim,
              run.result.log.back().mean_loss, run.seconds, trajectory.c_str());
  std::fflush(stdout);
  return run;
}

// Runs are created lazily and shared between criteria.
class Runs {
 public:
  Runs() : pairs_(make_synthetic_fixture(8, 32, 0)) {}

  std::span<const ImagePair> pairs() const { return pairs_; }

  const FixtureRun& get(const std::string& label) {
    auto it = runs_.find(label);
    if (it != runs_.end()) return it->second;
    LossWeights loss;
    ModelVariant variant = ModelVariant::kFull;
    if (label == "sdia_only") variant = ModelVariant::kSdiaOnly;
    if (label == "gisp_only") variant = ModelVariant::kGispOnly;
    if (label == "l1_only") loss.alpha2 = 0.0;
    if (label == "msssim_only") loss.alpha1 = 0.0;
    return runs_.emplace(label, run_fixture(label, variant, loss, pairs_)).first->second;
  }

 private:
  std::vector<ImagePair> pairs_;
  std::map<std::string, FixtureRun> runs_;
};

// 1 -------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  const auto reports = run_gradcheck_suite();
  const double secs = seconds_since(start);
  int failed = 0;
  double worst_op = 0.0, end_to_end = -1.0;
  std::int64_t fewest_points = 1 << 30;
  for (const auto& r : reports) {
    const bool e2e = r.op == "end_to_end";
    const bool ok = r.passed() && r.points >= 5 &&
                    r.threshold <= (e2e ? 1e-3 : 1e-4);
    if (!ok) {
      ++failed;
      std::printf("  %s\n", format_report(r).c_str());
    }
    fewest_points = std::min(fewest_points, r.points);
    if (e2e) {
      end_to_end = r.max_rel_error;
    } else {
      worst_op = std::max(worst_op, r.max_rel_error);
    }
  }
  const bool ok = failed == 0 && end_to_end >= 0.0 && secs < 300.0;
  return verdict(ok, std::to_string(reports.size()) + " checks, worst op " +
                         fmt("%.2e", worst_op) + ", end-to-end " +
                         fmt("%.2e", end_to_end) + ", min points " +
                         std::to_string(fewest_points) + ", " + fmt("%.1f", secs) +
                         " s (limit 300 s)");
}

// 2 -------------------------------------------------------------------------

// Locally smooth random image in [0, 1], so SSIM values are far from zero.
Tensor smooth_image(const Shape& shape, Rng& rng) {
  Tensor noise = testing::random_tensor(shape, rng, 0.0, 1.0);
  Tensor out(shape);
  const auto h = shape[2], w = shape[3];
  for (std::int64_t n = 0; n < shape[0]; ++n) {
    for (std::int64_t c = 0; c < shape[1]; ++c) {
      for (std::int64_t y = 0; y < h; ++y) {
        for (std::int64_t x = 0; x < w; ++x) {
          double acc = 0.0;
          int count = 0;
          for (std::int64_t dy = -2; dy <= 2; ++dy) {
            for (std::int64_t dx = -2; dx <= 2; ++dx) {
              const auto yy = y + dy, xx = x + dx;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              acc += noise.at(n, c, yy, xx);
              ++count;
            }
          }
          out.at(n, c, y, x) = static_cast<float>(acc / count);
        }
      }
    }
  }
  return out;
}

Tensor perturb(const Tensor& t, double amplitude, Rng& rng) {
  Tensor out = t;
  for (float& v : out.data()) {
    v = std::clamp(static_cast<float>(v + amplitude * normal01(rng)), 0.0f, 1.0f);
  }
  return out;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  constexpr int kInstances = 20;
  Rng rng = make_rng(2024, 2);
  double conv_err = 0.0, linear_err = 0.0, ssim_err = 0.0, ms_err = 0.0;

  for (int i = 0; i < kInstances; ++i) {
    const auto n = 1 + static_cast<std::int64_t>(uniform_index(rng, 2));
    const auto c = 1 + static_cast<std::int64_t>(uniform_index(rng, 6));
    const auto o = 1 + static_cast<std::int64_t>(uniform_index(rng, 6));
    const std::int64_t kernels[] = {1, 3, 5, 7};
    const auto k = kernels[uniform_index(rng, 4)];
    const auto stride = 1 + static_cast<std::int64_t>(uniform_index(rng, 2));
    const auto pad = static_cast<std::int64_t>(uniform_index(rng, k / 2 + 1));
    const auto h = k + static_cast<std::int64_t>(uniform_index(rng, 12));
    const auto w = k + static_cast<std::int64_t>(uniform_index(rng, 12));
    const auto x = testing::random_tensor({n, c, h, w}, rng);
    const auto wt = testing::random_tensor({o, c, k, k}, rng);
    const auto b = testing::random_tensor({o}, rng);
    std::int64_t oh = 0, ow = 0;
    const auto want = testing::naive_conv2d(x, wt, b, stride, pad, oh, ow);
    const auto got = conv2d(x.cast<double>(), wt.cast<double>(), b.cast<double>(),
                            conv_spec(o, c, k, stride, pad));
    conv_err = std::max(conv_err, testing::max_rel_diff(got.data(), want));
  }
  for (int i = 0; i < kInstances; ++i) {
    const auto n = 1 + static_cast<std::int64_t>(uniform_index(rng, 8));
    const auto f = 1 + static_cast<std::int64_t>(uniform_index(rng, 16));
    const auto g = 1 + static_cast<std::int64_t>(uniform_index(rng, 16));
    const auto x = testing::random_tensor({n, f}, rng);
    const auto wt = testing::random_tensor({g, f}, rng);
    const auto b = testing::random_tensor({g}, rng);
    const auto got = linear(x.cast<double>(), wt.cast<double>(), b.cast<double>());
    linear_err = std::max(linear_err,
                          testing::max_rel_diff(got.data(), testing::naive_linear(x, wt, b)));
  }
  for (int i = 0; i < kInstances; ++i) {
    const auto a = smooth_image({1, 3, 32, 32}, rng);
    const auto b = perturb(a, 0.02 + 0.01 * i, rng);
    ag::Tape<double> tape(false);
    const double got = ssim(tape.constant(a.cast<double>()), tape.constant(b.cast<double>()))
                           .value()[0];
    ssim_err = std::max(ssim_err, std::abs(got - testing::reference_ssim(a, b)));
  }
  for (int i = 0; i < kInstances; ++i) {
    const auto a = smooth_image({1, 3, 176, 176}, rng);
    const auto b = perturb(a, 0.02 + 0.01 * i, rng);
    ag::Tape<double> tape(false);
    const double got =
        ms_ssim(tape.constant(a.cast<double>()), tape.constant(b.cast<double>())).value()[0];
    ms_err = std::max(ms_err, std::abs(got - testing::reference_ms_ssim(a, b)));
  }
  const double secs = seconds_since(start);
  const bool ok = conv_err < 1e-5 && linear_err < 1e-6 && ssim_err <= 1e-5 &&
                  ms_err <= 1e-4 && secs < 120.0;
  return verdict(ok, std::to_string(kInstances) + " instances each: conv2d " +
                         fmt("%.2e", conv_err) + " rel (<1e-5), linear " +
                         fmt("%.2e", linear_err) + " rel (<1e-6), ssim " +
                         fmt("%.2e", ssim_err) + " abs (<=1e-5), ms_ssim " +
                         fmt("%.2e", ms_err) + " abs (<=1e-4), " + fmt("%.1f", secs) +
                         " s (limit 120 s)");
}

// 3 -------------------------------------------------------------------------

Outcome parameter_budget() {
  const std::int64_t total = param_count(init_params(ModelConfig{}, 0));
  constexpr std::int64_t kDocumented = 24296;
  const bool ok = total == kDocumented && total >= 20000 && total <= 30000;
  return verdict(ok, std::to_string(total) + " parameters (documented " +
                         std::to_string(kDocumented) + ", budget [20000, 30000])");
}

// 4 -------------------------------------------------------------------------

Outcome tiny_overfit(Runs& runs) {
  const auto& run = runs.get("full");
  const double psnr_at_2000 = run.train_eval.mean_psnr;
  return verdict(psnr_at_2000 > 30.0,
                 "training-set PSNR " + fmt("%.3f", psnr_at_2000) +
                     " dB after 2000 steps (> 30 dB), " + fmt("%.1f", run.seconds) +
                     " s (target 1800 s)");
}

// 5 -------------------------------------------------------------------------

Outcome ablation_ordering(Runs& runs) {
  const double sdia = runs.get("sdia_only").train_eval.mean_psnr;
  const double gisp = runs.get("gisp_only").train_eval.mean_psnr;
  const double full = runs.get("full").train_eval.mean_psnr;
  auto rel = [](double a, double b) { return a < b ? " < " : " >= "; };
  return verdict(sdia < gisp && gisp < full,
                 "PSNR sdia_only " + fmt("%.3f", sdia) + rel(sdia, gisp) + "gisp_only " +
                     fmt("%.3f", gisp) + rel(gisp, full) + "full " + fmt("%.3f", full) +
                     " (needs strict <)");
}

// 6 -------------------------------------------------------------------------

Outcome loss_ablation(Runs& runs) {
  const double l1 = runs.get("l1_only").train_eval.mean_ssim;
  const double ms = runs.get("msssim_only").train_eval.mean_ssim;
  const double both = runs.get("full").train_eval.mean_ssim;
  return verdict(l1 < both && ms < both,
                 "SSIM l1_only " + fmt("%.5f", l1) + ", msssim_only " + fmt("%.5f", ms) +
                     ", combined " + fmt("%.5f", both) + " (both must be lower)");
}

// 7 -------------------------------------------------------------------------

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_values(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.entries()[i].name != b.entries()[i].name ||
        !(a.entries()[i].value == b.entries()[i].value)) {
      return false;
    }
  }
  return true;
}

Outcome determinism(std::span<const ImagePair> pairs) {
  TrainConfig cfg = fixture_train_config();
  cfg.epochs_flat = 20;
  cfg.epochs_total = 40;
  cfg.val_every = 20;
  cfg.crop = 24;  // exercise the seeded crop/flip stream as well
  const ModelConfig model;

  const auto a = train(model, cfg, pairs);
  const auto b = train(model, cfg, pairs);
  const bool reproducible = same_values(a.params, b.params);

  const fs::path dir = fs::temp_directory_path() /
                       ("flight_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  save_weights(a.params, model, ModelVariant::kFull, dir / "w1.flwt");
  const auto loaded = load_weights(dir / "w1.flwt");
  save_weights(loaded.params, loaded.config, loaded.variant, dir / "w2.flwt");
  const bool weights_rt = read_bytes(dir / "w1.flwt") == read_bytes(dir / "w2.flwt") &&
                          same_values(loaded.params, a.params);

  TrainState state = init_train_state(model, cfg);
  train_until(state, model, cfg, pairs, {}, 17);
  save_checkpoint(state, model, ModelVariant::kFull, dir / "c1.flwt");
  Checkpoint ckpt = load_checkpoint(dir / "c1.flwt");
  save_checkpoint(ckpt.state, ckpt.config, ckpt.variant, dir / "c2.flwt");
  const bool ckpt_rt = read_bytes(dir / "c1.flwt") == read_bytes(dir / "c2.flwt");

  train_until(ckpt.state, model, cfg, pairs, {}, cfg.epochs_total);
  const bool resume = same_values(ckpt.state.params, a.params);
  fs::remove_all(dir);

  return verdict(reproducible && weights_rt && ckpt_rt && resume,
                 std::string("repeat run ") + (reproducible ? "identical" : "DIFFERS") +
                     ", weight round-trip " + (weights_rt ? "byte-identical" : "DIFFERS") +
                     ", checkpoint round-trip " + (ckpt_rt ? "byte-identical" : "DIFFERS") +
                     ", resume@17 " + (resume ? "bit-exact" : "DIFFERS"));
}

// 8 -------------------------------------------------------------------------

Outcome schedule() {
  const TrainConfig cfg;
  const double first = lr_at(0, cfg);
  const double last = lr_at(cfg.epochs_total - 1, cfg);
  double worst = 0.0;
  const double span = static_cast<double>(cfg.epochs_total - 1 - cfg.epochs_flat);
  for (int i = 1; i <= 10; ++i) {
    const std::int64_t epoch =
        cfg.epochs_flat + (cfg.epochs_total - 1 - cfg.epochs_flat) * i / 11;
    const double t = static_cast<double>(epoch - cfg.epochs_flat) / span;
    const double want = cfg.lr_initial + (cfg.lr_initial / 10.0 - cfg.lr_initial) * t;
    worst = std::max(worst, std::abs(lr_at(epoch, cfg) - want));
  }
  const bool ok = first == 8e-4 && std::abs(last - 8e-5) < 1e-18 && worst < 1e-12;
  return verdict(ok, "lr(0)=" + fmt("%.6g", first) + ", lr(" +
                         std::to_string(cfg.epochs_total - 1) + ")=" + fmt("%.6g", last) +
                         ", max interior deviation " + fmt("%.1e", worst) + " (<1e-12)");
}

// 9 -------------------------------------------------------------------------

Outcome lol_reproduction() {
  const char* data = std::getenv("FLIGHT_LOL_EVAL_DIR");
  const char* weights = std::getenv("FLIGHT_LOL_WEIGHTS");
  if (data == nullptr || weights == nullptr || !*data || !*weights) {
    return {Status::kSkip,
            "set FLIGHT_LOL_EVAL_DIR (eval15 with low/ and high/) and FLIGHT_LOL_WEIGHTS"};
  }
  const auto pairs = load_pairs(scan_pairs(data).pairs);
  const auto model = load_weights(weights);
  const auto s = evaluate(model.params, model.config, model.variant, pairs);
  return verdict(s.mean_psnr >= 23.0 && s.mean_ssim >= 0.80,
                 std::to_string(pairs.size()) + " pairs: PSNR " + fmt("%.3f", s.mean_psnr) +
                     " dB (>=23.0), SSIM " + fmt("%.4f", s.mean_ssim) + " (>=0.80)");
}

// 10 ------------------------------------------------------------------------

Outcome bench_methodology() {
  const char* argv[] = {"flight", "bench", "--size", "600x400", "--runs", "100"};
  std::ostringstream out, err;
  const int code = cli::run(6, argv, out, err);
  std::map<std::string, std::string> fields;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line);) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) fields[line.substr(0, colon)] = line.substr(colon + 2);
  }
  const bool ok = code == 0 && fields["size"] == "600x400" && fields["runs"] == "100" &&
                  fields.count("mean_ms") && fields.count("median_ms") &&
                  fields.count("min_ms") && fields.count("max_ms") &&
                  fields["params"] == "24296";
  return verdict(ok, "exit " + std::to_string(code) + ", size " + fields["size"] +
                         ", runs " + fields["runs"] + ", mean " + fields["mean_ms"] +
                         " ms, median " + fields["median_ms"] + " ms, params " +
                         fields["params"] + (err.str().empty() ? "" : ", stderr: " + err.str()));
}

// Additional trained-behaviour properties --------------------------------------

Outcome smoothed_loss(Runs& runs) {
  const auto& log = runs.get("full").result.log;
  std::vector<double> windows;
  for (std::size_t w = 0; w < 5; ++w) {
    double acc = 0.0;
    for (std::size_t e = 10 * w; e < 10 * w + 10; ++e) acc += log[e].mean_loss;
    windows.push_back(acc / 10.0);
  }
  bool ok = true;
  std::string detail = "10-epoch means over epochs 0-49:";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    detail += " " + fmt("%.5f", windows[i]);
    if (i > 0 && windows[i] > windows[i - 1]) ok = false;
  }
  return verdict(ok, detail + " (non-increasing)");
}

Outcome gain_on_darker_copy(Runs& runs) {
  const auto& run = runs.get("full");
  const ModelConfig cfg;
  int larger = 0;
  double min_ratio = 1e30, max_ratio = 0.0;
  for (const auto& pair : runs.pairs()) {
    Tensor darker = pair.low;
    for (float& v : darker.data()) v *= 0.5f;
    ag::Tape<float> tape(false);
    const auto vars = bind_params(tape, run.result.params);
    const float g = ge_forward(tape.constant(pair.low), vars, cfg).value()[0];
    const float gd = ge_forward(tape.constant(darker), vars, cfg).value()[0];
    larger += gd > g;
    min_ratio = std::min(min_ratio, static_cast<double>(gd / g));
    max_ratio = std::max(max_ratio, static_cast<double>(gd / g));
  }
  const int n = static_cast<int>(runs.pairs().size());
  return verdict(larger == n, std::to_string(larger) + "/" + std::to_string(n) +
                                  " pairs have a larger gain for the x0.5 copy, ratio " +
                                  fmt("%.3f", min_ratio) + ".." + fmt("%.3f", max_ratio));
}

struct Criterion {
  std::string id;
  std::string name;
  bool gating;
  std::function<Outcome()> check;
};

int run_all() {
  Runs runs;
  const std::vector<Criterion> criteria = {
      {"1", "gradient correctness", true, gradient_correctness},
      {"2", "oracle equivalence", true, oracle_equivalence},
      {"3", "parameter budget", true, parameter_budget},
      {"4", "tiny-overfit convergence", true, [&] { return tiny_overfit(runs); }},
      {"5", "ablation ordering", true, [&] { return ablation_ordering(runs); }},
      {"6", "loss ablation direction", true, [&] { return loss_ablation(runs); }},
      {"7", "determinism and persistence", true, [&] { return determinism(runs.pairs()); }},
      {"8", "schedule conformance", true, schedule},
      {"9", "LOL-v1 reproduction (extended)", false, lol_reproduction},
      {"10", "bench harness", true, bench_methodology},
      {"x1", "smoothed loss non-increasing (info)", false,
       [&] { return smoothed_loss(runs); }},
      {"x2", "gain rises on darker input (info)", false,
       [&] { return gain_on_darker_copy(runs); }},
  };

  int gating_failures = 0;
  const auto all_start = Clock::now();
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const char* label = outcome.status == Status::kPass   ? "PASS"
                        : outcome.status == Status::kSkip ? "SKIP"
                                                          : "FAIL";
    if (outcome.status == Status::kFail && c.gating) ++gating_failures;
    std::printf("[%s] %s %s%s: %s [%.1f s]\n", c.id.c_str(), label, c.name.c_str(),
                c.gating ? "" : " (non-gating)", outcome.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%s: %d gating failure(s), %.1f s total\n",
              gating_failures == 0 ? "ACCEPTED" : "REJECTED", gating_failures,
              seconds_since(all_start));
  return gating_failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace flight

int main() { return flight::run_all(); }
