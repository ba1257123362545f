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

#ifndef FLIGHT_WEIGHT_FILE_H_
#define FLIGHT_WEIGHT_FILE_H_

// Tensor container shared by weight files and training checkpoints.
// Little-endian throughout:
//
//   "FLWT" | u32 version (=1) | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 rank | rank x u32 dims |
//               prod(dims) x f32 payload
//   u32 CRC32 (IEEE) over every preceding byte

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flight/params.h"
#include "flight/tensor.h"

namespace flight {

inline constexpr std::uint32_t kWeightFileVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

std::vector<std::uint8_t> encode_container(std::span<const NamedTensor> tensors);
// Validates structure then CRC; errors carry the byte offset of the fault.
std::vector<NamedTensor> decode_container(std::span<const std::uint8_t> bytes);

// Writes via a temporary sibling and an atomic rename.
void write_container(std::span<const NamedTensor> tensors,
                     const std::filesystem::path& path);
std::vector<NamedTensor> read_container(const std::filesystem::path& path);

// Non-negative integers below 2^48, stored exactly as two f32 limbs.
Tensor encode_counter(std::int64_t value);
std::int64_t decode_counter(const Tensor& limbs);

// ModelConfig plus variant as the "meta.model_config" entry.
NamedTensor encode_model_config(const ModelConfig& cfg, ModelVariant variant);
std::pair<ModelConfig, ModelVariant> decode_model_config(const Tensor& entry);

struct LoadedWeights {
  ParamStore params;
  ModelConfig config;
  ModelVariant variant = ModelVariant::kFull;
};

void save_weights(const ParamStore& params, const ModelConfig& cfg,
                  ModelVariant variant, const std::filesystem::path& path);

// Shapes are checked against the layout of the embedded config.
LoadedWeights load_weights(const std::filesystem::path& path);
// Shapes are checked against `runtime_cfg`; a mismatch names the tensor.
LoadedWeights load_weights(const std::filesystem::path& path,
                           const ModelConfig& runtime_cfg);

// Builds a ParamStore from container entries, in layout order, checking
// every expected tensor is present with the expected shape.
ParamStore params_from_entries(std::span<const NamedTensor> entries,
                               const ModelConfig& cfg, ModelVariant variant);

}  // namespace flight

#endif  // FLIGHT_WEIGHT_FILE_H_
