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

#include "flight/weight_file.h"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>

namespace flight {
namespace {

constexpr char kMagic[4] = {'F', 'L', 'W', 'T'};
constexpr const char* kModelConfigName = "meta.model_config";

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(n));
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t limit)
      : bytes_(bytes), limit_(limit) {}

  std::size_t offset() const { return offset_; }

  void need(std::size_t n, const char* what) const {
    if (n > limit_ - offset_) {
      throw FormatError("truncated container: " + std::string(what) +
                        " needs " + std::to_string(n) + " bytes at offset " +
                        std::to_string(offset_) + ", " +
                        std::to_string(limit_ - offset_) + " available");
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[offset_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const std::uint16_t v = static_cast<std::uint16_t>(
        bytes_[offset_] | (bytes_[offset_ + 1] << 8));
    offset_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
    }
    offset_ += 4;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
    offset_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t offset_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_container(std::span<const NamedTensor> tensors) {
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u32(kWeightFileVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.empty() || t.name.size() > 0xFFFF) {
      throw FormatError("tensor name length out of range: '" + t.name + "'");
    }
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.raw(t.name);
    w.u8(static_cast<std::uint8_t>(t.value.rank()));
    for (auto d : t.value.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.value.data()) w.f32(v);
  }
  w.u32(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

std::vector<NamedTensor> decode_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) {
    throw FormatError("container too short: " + std::to_string(bytes.size()) +
                      " bytes, need at least 16");
  }
  const std::size_t body = bytes.size() - 4;
  Reader r(bytes, body);
  if (r.str(4, "magic") != std::string_view(kMagic, 4)) {
    throw FormatError("bad magic at offset 0 (expected \"FLWT\")");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kWeightFileVersion) {
    throw FormatError("unsupported version " + std::to_string(version) +
                      " at offset 4");
  }
  const std::uint32_t count = r.u32("tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t start = r.offset();
    const std::uint16_t name_len = r.u16("name length");
    if (name_len == 0) {
      throw FormatError("empty tensor name at offset " + std::to_string(start));
    }
    std::string name = r.str(name_len, "name");
    const std::size_t rank_at = r.offset();
    const std::uint8_t rank = r.u8("rank");
    if (rank < 1 || rank > 4) {
      throw FormatError("tensor '" + name + "' has invalid rank " +
                        std::to_string(rank) + " at offset " +
                        std::to_string(rank_at));
    }
    Shape shape;
    std::uint64_t numel = 1;
    for (int d = 0; d < rank; ++d) {
      const std::size_t dim_at = r.offset();
      const std::uint32_t extent = r.u32("dimension");
      if (extent == 0) {
        throw FormatError("tensor '" + name + "' has a zero extent at offset " +
                          std::to_string(dim_at));
      }
      shape.push_back(extent);
      numel *= extent;
      if (numel > body) {
        throw FormatError("tensor '" + name + "' declares " +
                          std::to_string(numel) + "+ elements, more than the " +
                          "file holds (offset " + std::to_string(dim_at) + ")");
      }
    }
    r.need(static_cast<std::size_t>(numel) * 4, "payload");
    std::vector<float> data(static_cast<std::size_t>(numel));
    for (float& v : data) v = std::bit_cast<float>(r.u32("payload"));
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  if (r.offset() != body) {
    throw FormatError(std::to_string(body - r.offset()) +
                      " unexpected trailing bytes at offset " +
                      std::to_string(r.offset()));
  }
  Reader crc_reader(bytes, bytes.size());
  crc_reader.str(body, "body");
  const std::uint32_t stored = crc_reader.u32("crc");
  const std::uint32_t computed = crc32_of(bytes.first(body));
  if (stored != computed) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "CRC mismatch at offset %zu: stored %08x, computed %08x", body,
                  stored, computed);
    throw FormatError(buf);
  }
  return out;
}

void write_container(std::span<const NamedTensor> tensors,
                     const std::filesystem::path& path) {
  const auto bytes = encode_container(tensors);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw FormatError("cannot move " + tmp.string() + " to " + path.string() +
                      ": " + ec.message());
  }
}

std::vector<NamedTensor> read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_container(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor encode_counter(std::int64_t value) {
  if (value < 0 || value >= (std::int64_t{1} << 48)) {
    throw std::out_of_range("counter out of range: " + std::to_string(value));
  }
  return Tensor({2}, {static_cast<float>(value & 0xFFFFFF),
                      static_cast<float>(value >> 24)});
}

std::int64_t decode_counter(const Tensor& limbs) {
  if (limbs.shape() != Shape{2}) {
    throw FormatError("counter entry must have shape (2), got " +
                      shape_str(limbs.shape()));
  }
  for (float v : limbs.data()) {
    if (!(v >= 0.0f && v < 16777216.0f) || v != std::floor(v)) {
      throw FormatError("counter limb out of range");
    }
  }
  return static_cast<std::int64_t>(limbs[0]) +
         (static_cast<std::int64_t>(limbs[1]) << 24);
}

NamedTensor encode_model_config(const ModelConfig& cfg, ModelVariant variant) {
  return {kModelConfigName,
          Tensor({7}, {static_cast<float>(cfg.ime_channels),
                       static_cast<float>(cfg.ge_channels),
                       static_cast<float>(cfg.gisp_channels),
                       static_cast<float>(cfg.df_blocks),
                       static_cast<float>(cfg.eca_reduction),
                       static_cast<float>(cfg.celu_alpha),
                       static_cast<float>(static_cast<int>(variant))})};
}

std::pair<ModelConfig, ModelVariant> decode_model_config(const Tensor& entry) {
  if (entry.shape() != Shape{7}) {
    throw FormatError(std::string(kModelConfigName) + " must have shape (7), got " +
                      shape_str(entry.shape()));
  }
  ModelConfig cfg;
  cfg.ime_channels = static_cast<std::int64_t>(entry[0]);
  cfg.ge_channels = static_cast<std::int64_t>(entry[1]);
  cfg.gisp_channels = static_cast<std::int64_t>(entry[2]);
  cfg.df_blocks = static_cast<std::int64_t>(entry[3]);
  cfg.eca_reduction = static_cast<std::int64_t>(entry[4]);
  cfg.celu_alpha = entry[5];
  const int variant = static_cast<int>(entry[6]);
  if (variant < 0 || variant > 2) {
    throw FormatError("invalid model variant code " + std::to_string(variant));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("embedded model config is invalid: ") + e.what());
  }
  return {cfg, static_cast<ModelVariant>(variant)};
}

void save_weights(const ParamStore& params, const ModelConfig& cfg,
                  ModelVariant variant, const std::filesystem::path& path) {
  std::vector<NamedTensor> entries;
  entries.push_back(encode_model_config(cfg, variant));
  for (const auto& e : params.entries()) entries.push_back({e.name, e.value});
  write_container(entries, path);
}

ParamStore params_from_entries(std::span<const NamedTensor> entries,
                               const ModelConfig& cfg, ModelVariant variant) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  ParamStore store;
  for (const auto& spec : param_layout(cfg, variant)) {
    auto it = by_name.find(spec.name);
    if (it == by_name.end()) {
      throw ShapeError("weight file is missing tensor '" + spec.name + "'");
    }
    if (it->second->value.shape() != spec.shape) {
      throw ShapeError("tensor '" + spec.name + "' has shape " +
                       shape_str(it->second->value.shape()) + ", expected " +
                       shape_str(spec.shape));
    }
    store.add(spec.name, it->second->value);
  }
  return store;
}

namespace {

LoadedWeights load_with(const std::filesystem::path& path,
                        const ModelConfig* runtime_cfg) {
  const auto entries = read_container(path);
  const NamedTensor* meta = nullptr;
  for (const auto& e : entries) {
    if (e.name == kModelConfigName) meta = &e;
  }
  if (meta == nullptr) {
    throw FormatError(path.string() + ": missing " + kModelConfigName);
  }
  auto [embedded, variant] = decode_model_config(meta->value);
  const ModelConfig& cfg = runtime_cfg ? *runtime_cfg : embedded;
  LoadedWeights out;
  out.params = params_from_entries(entries, cfg, variant);
  out.config = cfg;
  out.variant = variant;
  return out;
}

}  // namespace

LoadedWeights load_weights(const std::filesystem::path& path) {
  return load_with(path, nullptr);
}

LoadedWeights load_weights(const std::filesystem::path& path,
                           const ModelConfig& runtime_cfg) {
  return load_with(path, &runtime_cfg);
}

}  // namespace flight
