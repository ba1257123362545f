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

#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "flight/checkpoint.h"
#include "flight/config.h"
#include "flight/dataset.h"
#include "flight/gradcheck_suite.h"
#include "flight/image_io.h"
#include "flight/model.h"
#include "flight/params.h"
#include "flight/random.h"
#include "flight/trainer.h"
#include "flight/weight_file.h"

namespace flight::cli {
namespace {

namespace fs = std::filesystem;

// Raised for bad invocations detected after flag parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// file, then FLIGHT_SEED, then --set overrides.
RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!config_path.empty()) {
    if (!fs::is_regular_file(config_path)) {
      throw UsageError("config file not found: " + config_path);
    }
    apply_config_file(cfg, config_path);
  }
  apply_environment(cfg);
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--set expects key=value, got '" + item + "'");
    }
    try {
      apply_setting(cfg, item.substr(0, eq), item.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--set: ") + e.what());
    }
  }
  return cfg;
}

std::vector<fs::path> list_inputs(const fs::path& input) {
  if (fs::is_regular_file(input)) return {input};
  if (!fs::is_directory(input)) {
    throw UsageError("input not found: " + input.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ImagePair> load_dataset(const std::string& root,
                                    const std::string& manifest,
                                    const std::string& low,
                                    const std::string& high, bool strict,
                                    std::ostream& err) {
  PairScan scan;
  if (!manifest.empty()) {
    if (!fs::is_regular_file(manifest)) {
      throw UsageError("pair manifest not found: " + manifest);
    }
    scan = read_pair_manifest(manifest);
  } else {
    if (!fs::is_directory(root)) {
      throw UsageError("data directory not found: " + root);
    }
    scan = scan_pairs(root, low, high);
  }
  for (const auto& w : scan.warnings) err << "warning: " << w << "\n";
  if (strict && !scan.warnings.empty()) {
    throw DatasetError(std::to_string(scan.warnings.size()) +
                       " unpaired file(s); evaluation needs a complete pairing");
  }
  return load_pairs(scan.pairs);
}

struct Size {
  std::int64_t width = 600;
  std::int64_t height = 400;
};

Size parse_size(const std::string& text) {
  Size s;
  char tail = 0;
  long long w = 0, h = 0;
  if (std::sscanf(text.c_str(), "%lldx%lld%c", &w, &h, &tail) != 2) {
    throw UsageError("--size expects WxH, got '" + text + "'");
  }
  if (w < 8 || h < 8) throw UsageError("--size must be at least 8x8");
  s.width = w;
  s.height = h;
  return s;
}

// enhance ------------------------------------------------------------------

struct EnhanceArgs {
  std::string weights, input, output;
};

int cmd_enhance(const EnhanceArgs& a, std::ostream& out, std::ostream& err) {
  const auto inputs = list_inputs(a.input);
  if (inputs.empty()) throw UsageError("no PNG files in " + a.input);
  const LoadedWeights model = load_weights(a.weights);
  fs::create_directories(a.output);
  int failures = 0;
  for (const auto& path : inputs) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const Tensor lli = load_image(path);
      const Tensor result = enhance(model.params, model.config, model.variant, lli);
      const auto stop = std::chrono::steady_clock::now();
      const fs::path target = fs::path(a.output) / (path.stem().string() + ".png");
      save_image(result, target);
      const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
      out << path.filename().string() << " -> " << target.string() << " "
          << fmt("%.2f", ms) << " ms\n";
    } catch (const std::exception& e) {
      ++failures;
      err << "error: " << path.string() << ": " << e.what() << "\n";
    }
  }
  out << (inputs.size() - failures) << "/" << inputs.size() << " images enhanced\n";
  return failures == 0 ? kExitOk : kExitFailure;
}

// train --------------------------------------------------------------------

struct TrainArgs {
  std::string data, manifest, val_data, config, out, ablation, resume;
  std::string low = "low", high = "high";
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = resolve_config(a.config, a.overrides);
  if (!a.ablation.empty()) {
    try {
      cfg.train.ablation = parse_variant(a.ablation);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const auto train_pairs = load_dataset(a.data, a.manifest, a.low, a.high, false, err);
  std::vector<ImagePair> val_pairs;
  if (!a.val_data.empty()) {
    val_pairs = load_dataset(a.val_data, "", a.low, a.high, false, err);
  }
  fs::create_directories(a.out);
  const fs::path out_dir = a.out;
  const ModelVariant variant = cfg.train.ablation;

  TrainState state;
  if (!a.resume.empty()) {
    Checkpoint ckpt = load_checkpoint(a.resume);
    if (!(ckpt.config == cfg.model) || ckpt.variant != variant) {
      throw UsageError("checkpoint " + a.resume +
                       " was written for a different model configuration");
    }
    state = std::move(ckpt.state);
    out << "resuming at epoch " << state.epoch << "\n";
  } else {
    state = init_train_state(cfg.model, cfg.train);
  }

  {
    std::ofstream config_out(out_dir / "config.txt");
    config_out << to_config_text(cfg);
  }
  const fs::path log_path = out_dir / "train_log.csv";
  const bool append = !a.resume.empty() && fs::exists(log_path);
  std::ofstream log(log_path, append ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  if (!append) log << log_csv_header() << "\n";

  out << "training " << variant_name(variant) << " on " << train_pairs.size()
      << " pairs, " << param_count(state.params) << " parameters, "
      << cfg.train.run_epochs() << " epochs\n";

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochLog& row) {
    log << log_csv_row(row) << "\n";
    log.flush();
    if (!a.quiet && row.val_psnr) out << log_csv_row(row) << std::endl;
  };
  const fs::path checkpoint_path = out_dir / "checkpoint.flwt";
  hooks.on_checkpoint = [&](const TrainState& s) {
    save_checkpoint(s, cfg.model, variant, checkpoint_path);
  };

  train_until(state, cfg.model, cfg.train, train_pairs, val_pairs,
              cfg.train.run_epochs(), hooks);
  save_checkpoint(state, cfg.model, variant, checkpoint_path);
  const fs::path weights_path = out_dir / "weights.flwt";
  save_weights(state.params, cfg.model, variant, weights_path);
  out << "wrote " << weights_path.string() << "\n";
  return kExitOk;
}

// eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string data, manifest, weights;
  std::string low = "low", high = "high";
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto pairs = load_dataset(a.data, a.manifest, a.low, a.high, true, err);
  EvalSummary summary;
  if (a.weights.empty()) {
    summary = score_pairs(pairs);
  } else {
    const LoadedWeights model = load_weights(a.weights);
    summary = evaluate(model.params, model.config, model.variant, pairs);
  }
  out << "image,psnr,ssim\n";
  for (const auto& row : summary.rows) {
    out << row.id << "," << fmt("%.4f", row.score.psnr) << ","
        << fmt("%.6f", row.score.ssim) << "\n";
  }
  out << "mean," << fmt("%.4f", summary.mean_psnr) << ","
      << fmt("%.6f", summary.mean_ssim) << "\n";
  return kExitOk;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string weights, config, size = "600x400";
  std::int64_t runs = 100;
  std::int64_t warmup = 10;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
  const Size size = parse_size(a.size);
  if (a.runs < 1) throw UsageError("--runs must be >= 1");
  if (a.warmup < 0) throw UsageError("--warmup must be >= 0");

  ModelConfig cfg;
  ModelVariant variant = ModelVariant::kFull;
  ParamStore params;
  if (!a.weights.empty()) {
    LoadedWeights w = load_weights(a.weights);
    cfg = w.config;
    variant = w.variant;
    params = std::move(w.params);
  } else {
    RunConfig run = resolve_config(a.config, {});
    cfg = run.model;
    params = init_params(cfg, run.train.seed);
  }

  Rng rng = make_rng(0, 0xBE);
  Tensor image({1, 3, size.height, size.width});
  for (float& v : image.data()) v = static_cast<float>(uniform(rng, 0.0, 0.3));

  for (std::int64_t i = 0; i < a.warmup; ++i) enhance(params, cfg, variant, image);
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(a.runs));
  for (std::int64_t i = 0; i < a.runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    enhance(params, cfg, variant, image);
    const auto stop = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : ms) total += v;
  const std::size_t n = sorted.size();
  const double median =
      n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  out << "size: " << size.width << "x" << size.height << "\n";
  out << "warmup: " << a.warmup << "\n";
  out << "runs: " << a.runs << "\n";
  out << "mean_ms: " << fmt("%.3f", total / static_cast<double>(n)) << "\n";
  out << "median_ms: " << fmt("%.3f", median) << "\n";
  out << "min_ms: " << fmt("%.3f", sorted.front()) << "\n";
  out << "max_ms: " << fmt("%.3f", sorted.back()) << "\n";
  out << "params: " << param_count(params) << "\n";
  return kExitOk;
}

// gradcheck / params / make-fixture -----------------------------------------

struct GradcheckArgs {
  int points = 5;
  std::uint64_t seed = 7;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream&) {
  if (a.points < 5) throw UsageError("--points must be >= 5");
  GradCheckSuiteOptions options;
  options.points = a.points;
  options.seed = a.seed;
  int failed = 0;
  run_gradcheck_suite(options, [&](const GradCheckReport& r) {
    out << format_report(r) << std::endl;
    if (!r.passed()) ++failed;
  });
  out << (failed == 0 ? "all gradient checks passed"
                      : std::to_string(failed) + " gradient check(s) failed")
      << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

struct ParamsArgs {
  std::string config;
  std::string ablation = "full";
};

int cmd_params(const ParamsArgs& a, std::ostream& out, std::ostream&) {
  const RunConfig cfg = resolve_config(a.config, {});
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ModelVariant variant;
  try {
    variant = parse_variant(a.ablation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<std::pair<std::string, std::int64_t>> blocks;
  std::int64_t total = 0;
  for (const auto& spec : param_layout(cfg.model, variant)) {
    if (blocks.empty() || blocks.back().first != spec.block) {
      blocks.emplace_back(spec.block, 0);
    }
    const std::int64_t n = shape_numel(spec.shape);
    blocks.back().second += n;
    total += n;
  }
  out << "block,params\n";
  for (const auto& [block, n] : blocks) out << block << "," << n << "\n";
  out << "total," << total << "\n";
  return kExitOk;
}

struct FixtureArgs {
  std::string out;
  std::int64_t pairs = 8;
  std::int64_t size = 32;
  std::uint64_t seed = 0;
};

int cmd_make_fixture(const FixtureArgs& a, std::ostream& out, std::ostream&) {
  if (a.pairs < 1 || a.size < 8) throw UsageError("need --pairs >= 1 and --size >= 8");
  const auto pairs = make_synthetic_fixture(a.pairs, a.size, a.seed);
  write_pairs(pairs, a.out);
  out << "wrote " << pairs.size() << " pairs to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-light image enhancement: train, evaluate and run the network"};
  app.name("flight");
  app.require_subcommand(1);

  EnhanceArgs enhance_args;
  auto* enhance_cmd = app.add_subcommand("enhance", "Enhance one PNG or a directory of PNGs");
  enhance_cmd->add_option("--weights", enhance_args.weights, "Weight file")->required();
  enhance_cmd->add_option("--input", enhance_args.input, "PNG file or directory")->required();
  enhance_cmd->add_option("--output", enhance_args.output, "Output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train from paired low/normal-light images");
  auto* train_source = train_cmd->add_option_group("source", "exactly one of");
  train_source->add_option("--data", train_args.data, "Dataset root with low/high folders");
  train_source->add_option("--manifest", train_args.manifest,
                           "CSV of low,high paths used instead of folder pairing");
  train_source->require_option(1);
  train_cmd->add_option("--val-data", train_args.val_data, "Validation dataset root");
  train_cmd->add_option("--low", train_args.low, "Low-light subfolder")->capture_default_str();
  train_cmd->add_option("--high", train_args.high, "Reference subfolder")->capture_default_str();
  train_cmd->add_option("--config", train_args.config, "key = value config file");
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--ablation", train_args.ablation, "full, sdia or gisp");
  train_cmd->add_option("--seed", train_args.seed, "Seed (overrides config and FLIGHT_SEED)");
  train_cmd->add_option("--set", train_args.overrides, "Override a config key: key=value");
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to continue from");
  train_cmd->add_flag("--quiet", train_args.quiet, "Do not echo validation rows");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "PSNR/SSIM table as CSV; without --weights the low folder is scored as is");
  auto* eval_source = eval_cmd->add_option_group("source", "exactly one of");
  eval_source->add_option("--data", eval_args.data, "Dataset root with low/high folders");
  eval_source->add_option("--manifest", eval_args.manifest, "CSV of low,high paths");
  eval_source->require_option(1);
  eval_cmd->add_option("--weights", eval_args.weights, "Weight file");
  eval_cmd->add_option("--low", eval_args.low, "Input subfolder")->capture_default_str();
  eval_cmd->add_option("--high", eval_args.high, "Reference subfolder")->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time forward passes");
  bench_cmd->add_option("--weights", bench_args.weights,
                        "Weight file (default: seeded initialisation)");
  bench_cmd->add_option("--config", bench_args.config, "Model config when no weights");
  bench_cmd->add_option("--size", bench_args.size, "Image size WxH")->capture_default_str();
  bench_cmd->add_option("--runs", bench_args.runs, "Timed runs")->capture_default_str();
  bench_cmd->add_option("--warmup", bench_args.warmup, "Untimed runs")->capture_default_str();

  GradcheckArgs gradcheck_args;
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gradcheck_cmd->add_option("--points", gradcheck_args.points, "Random points per op")
      ->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck_args.seed, "Seed")->capture_default_str();

  ParamsArgs params_args;
  auto* params_cmd = app.add_subcommand("params", "Per-block parameter counts");
  params_cmd->add_option("--config", params_args.config, "key = value config file");
  params_cmd->add_option("--ablation", params_args.ablation, "full, sdia or gisp")
      ->capture_default_str();

  FixtureArgs fixture_args;
  auto* fixture_cmd =
      app.add_subcommand("make-fixture", "Write the seeded synthetic pair dataset");
  fixture_cmd->add_option("--out", fixture_args.out, "Output root")->required();
  fixture_cmd->add_option("--pairs", fixture_args.pairs, "Pair count")->capture_default_str();
  fixture_cmd->add_option("--size", fixture_args.size, "Square image size")
      ->capture_default_str();
  fixture_cmd->add_option("--seed", fixture_args.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enhance_cmd) return cmd_enhance(enhance_args, out, err);
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*eval_cmd) return cmd_eval(eval_args, out, err);
    if (*bench_cmd) return cmd_bench(bench_args, out, err);
    if (*gradcheck_cmd) return cmd_gradcheck(gradcheck_args, out, err);
    if (*params_cmd) return cmd_params(params_args, out, err);
    if (*fixture_cmd) return cmd_make_fixture(fixture_args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace flight::cli
