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

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace flight {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

double parse_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" +
                      std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw ConfigError(std::string(key) + ": expected true/false, got '" +
                    std::string(text) + "'");
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FLIGHT_INT_FIELD(name, member)                                         \
  Field {                                                                      \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_int(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }            \
  }
#define FLIGHT_REAL_FIELD(name, member)                                        \
  Field {                                                                      \
    name,                                                                      \
        [](RunConfig& c, std::string_view v) { c.member = parse_real(name, v); }, \
        [](const RunConfig& c) { return format_real(c.member); }               \
  }
#define FLIGHT_BOOL_FIELD(name, member)                                        \
  Field {                                                                      \
    name,                                                                      \
        [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FLIGHT_INT_FIELD("ime_channels", model.ime_channels),
      FLIGHT_INT_FIELD("ge_channels", model.ge_channels),
      FLIGHT_INT_FIELD("gisp_channels", model.gisp_channels),
      FLIGHT_INT_FIELD("df_blocks", model.df_blocks),
      FLIGHT_INT_FIELD("eca_reduction", model.eca_reduction),
      FLIGHT_REAL_FIELD("celu_alpha", model.celu_alpha),
      FLIGHT_INT_FIELD("batch_size", train.batch_size),
      FLIGHT_REAL_FIELD("lr_initial", train.lr_initial),
      FLIGHT_INT_FIELD("epochs_flat", train.epochs_flat),
      FLIGHT_INT_FIELD("epochs_total", train.epochs_total),
      FLIGHT_BOOL_FIELD("finetune", train.finetune),
      FLIGHT_REAL_FIELD("finetune_lr", train.finetune_lr),
      FLIGHT_REAL_FIELD("weight_decay", train.weight_decay),
      FLIGHT_REAL_FIELD("adam_beta1", train.adam_beta1),
      FLIGHT_REAL_FIELD("adam_beta2", train.adam_beta2),
      FLIGHT_REAL_FIELD("adam_eps", train.adam_eps),
      FLIGHT_INT_FIELD("crop", train.crop),
      FLIGHT_BOOL_FIELD("hflip", train.hflip),
      Field{"seed",
            [](RunConfig& c, std::string_view v) { c.train.seed = parse_uint("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      FLIGHT_REAL_FIELD("loss_alpha1", train.loss.alpha1),
      FLIGHT_REAL_FIELD("loss_alpha2", train.loss.alpha2),
      FLIGHT_REAL_FIELD("loss_beta", train.loss.beta),
      Field{"ablation",
            [](RunConfig& c, std::string_view v) {
              try {
                c.train.ablation = parse_variant(v);
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("ablation: ") + e.what());
              }
            },
            [](const RunConfig& c) {
              return std::string(variant_name(c.train.ablation));
            }},
      FLIGHT_INT_FIELD("val_every", train.val_every),
      FLIGHT_INT_FIELD("checkpoint_every", train.checkpoint_every),
  };
  return table;
}

#undef FLIGHT_INT_FIELD
#undef FLIGHT_REAL_FIELD
#undef FLIGHT_BOOL_FIELD

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& cfg, std::string_view text,
                       std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'key = value'");
    }
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(where + "expected 'key = value'");
    }
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str(), path.string());
}

void apply_environment(RunConfig& cfg) {
  if (const char* seed = std::getenv("FLIGHT_SEED"); seed != nullptr && *seed) {
    try {
      cfg.train.seed = parse_uint("FLIGHT_SEED", trim(seed));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment: ") + e.what());
    }
  }
}

void validate(const RunConfig& cfg) {
  try {
    cfg.model.validate();
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace flight
