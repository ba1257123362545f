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

#ifndef FLIGHT_DATASET_H_
#define FLIGHT_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flight/random.h"
#include "flight/tensor.h"

namespace flight {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImagePair {
  Tensor low;   // 1 x 3 x H x W in [0, 1]
  Tensor high;  // same shape as low
  std::string id;
};

struct PairPaths {
  std::filesystem::path low;
  std::filesystem::path high;
  std::string id;
};

struct PairScan {
  std::vector<PairPaths> pairs;
  std::vector<std::string> warnings;  // one per unmatched file
};

// Pairs PNG files with identical names in root/low_subdir and
// root/high_subdir, sorted by byte-wise name order. Unmatched files are
// skipped with a warning; an empty intersection is an error.
PairScan scan_pairs(const std::filesystem::path& root,
                    const std::string& low_subdir = "low",
                    const std::string& high_subdir = "high");

// Explicit pairing for many-to-one datasets. Each non-empty line that does
// not start with '#' is `low_path,high_path`, relative to the manifest's
// directory. Pairs keep file order; the id is the low image's stem.
PairScan read_pair_manifest(const std::filesystem::path& manifest);

// Decodes every pair; low and high must have equal shapes.
std::vector<ImagePair> load_pairs(std::span<const PairPaths> paths);

// Applies one crop window and one flip decision to both images. Draws the
// top offset, the left offset, then (with hflip) the flip coin from `rng`.
// crop == 0 keeps the full frame.
ImagePair random_crop_flip(const ImagePair& pair, std::int64_t crop, Rng& rng,
                           bool hflip);

// Seeded paired data for overfitting checks:
//   high = Gaussian-blurred (sigma 4) uniform noise in [0.2, 0.9], each
//          channel stretched back to span [0.2, 0.9]
//   low  = clamp(0.3 * high^2.5 + N(0, 0.01^2), 0, 1)
// Pair i depends only on (seed, i).
std::vector<ImagePair> make_synthetic_fixture(std::int64_t n_pairs,
                                              std::int64_t size,
                                              std::uint64_t seed);

// Concatenates same-shaped pairs into N x 3 x H x W batches (low, high).
std::pair<Tensor, Tensor> stack_batch(std::span<const ImagePair> pairs);

// Writes root/low_subdir/<id>.png and root/high_subdir/<id>.png.
void write_pairs(std::span<const ImagePair> pairs,
                 const std::filesystem::path& root,
                 const std::string& low_subdir = "low",
                 const std::string& high_subdir = "high");

}  // namespace flight

#endif  // FLIGHT_DATASET_H_
