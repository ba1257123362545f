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

#include "flight/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "flight/image_io.h"

namespace flight {
namespace {

namespace fs = std::filesystem;

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

std::set<std::string> png_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DatasetError("dataset directory does not exist: " + dir.string());
  }
  std::set<std::string> names;  // std::string ordering is byte-wise
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_png(entry.path())) {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Separable Gaussian blur with edge clamping, in place on one H x W plane.
void blur_plane(std::vector<double>& plane, std::int64_t h, std::int64_t w,
                double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += taps[i + radius];
  }
  for (double& t : taps) t /= total;

  std::vector<double> tmp(plane.size());
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const std::int64_t xx = std::clamp<std::int64_t>(x + i, 0, w - 1);
        acc += taps[i + radius] * plane[y * w + xx];
      }
      tmp[y * w + x] = acc;
    }
  }
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const std::int64_t yy = std::clamp<std::int64_t>(y + i, 0, h - 1);
        acc += taps[i + radius] * tmp[yy * w + x];
      }
      plane[y * w + x] = acc;
    }
  }
}

}  // namespace

PairScan scan_pairs(const fs::path& root, const std::string& low_subdir,
                    const std::string& high_subdir) {
  const fs::path low_dir = root / low_subdir;
  const fs::path high_dir = root / high_subdir;
  const auto low = png_names(low_dir);
  const auto high = png_names(high_dir);

  PairScan scan;
  for (const auto& name : low) {
    if (high.count(name)) {
      scan.pairs.push_back(
          {low_dir / name, high_dir / name, fs::path(name).stem().string()});
    } else {
      scan.warnings.push_back("no " + high_subdir + " match for " +
                              (low_dir / name).string());
    }
  }
  for (const auto& name : high) {
    if (!low.count(name)) {
      scan.warnings.push_back("no " + low_subdir + " match for " +
                              (high_dir / name).string());
    }
  }
  if (scan.pairs.empty()) {
    throw DatasetError("no matching image pairs between " + low_dir.string() +
                       " and " + high_dir.string());
  }
  return scan;
}

PairScan read_pair_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DatasetError("cannot open pair manifest " + manifest.string());
  const fs::path base = manifest.parent_path();
  PairScan scan;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      throw DatasetError(manifest.string() + ":" + std::to_string(line_no) +
                         ": expected 'low_path,high_path'");
    }
    const fs::path low = base / trim(text.substr(0, comma));
    const fs::path high = base / trim(text.substr(comma + 1));
    if (!fs::is_regular_file(low) || !fs::is_regular_file(high)) {
      scan.warnings.push_back(manifest.string() + ":" + std::to_string(line_no) +
                              ": missing file, pair skipped");
      continue;
    }
    scan.pairs.push_back({low, high, low.stem().string()});
  }
  if (scan.pairs.empty()) {
    throw DatasetError("pair manifest lists no usable pairs: " + manifest.string());
  }
  return scan;
}

std::vector<ImagePair> load_pairs(std::span<const PairPaths> paths) {
  std::vector<ImagePair> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    ImagePair pair{load_image(p.low), load_image(p.high), p.id};
    if (pair.low.shape() != pair.high.shape()) {
      throw DatasetError("pair '" + p.id + "' has mismatched sizes " +
                         shape_str(pair.low.shape()) + " and " +
                         shape_str(pair.high.shape()));
    }
    out.push_back(std::move(pair));
  }
  return out;
}

ImagePair random_crop_flip(const ImagePair& pair, std::int64_t crop, Rng& rng,
                           bool hflip) {
  const std::int64_t h = pair.low.dim(2), w = pair.low.dim(3);
  const std::int64_t ch = crop == 0 ? h : crop;
  const std::int64_t cw = crop == 0 ? w : crop;
  if (crop < 0 || ch > h || cw > w) {
    throw DatasetError("crop " + std::to_string(crop) + " exceeds image '" +
                       pair.id + "' of size " + std::to_string(w) + "x" +
                       std::to_string(h));
  }
  const auto top = static_cast<std::int64_t>(uniform_index(rng, h - ch + 1));
  const auto left = static_cast<std::int64_t>(uniform_index(rng, w - cw + 1));
  const bool flip = hflip && uniform01(rng) < 0.5;

  auto window = [&](const Tensor& src) {
    Tensor out({1, 3, ch, cw});
    for (std::int64_t c = 0; c < 3; ++c) {
      for (std::int64_t y = 0; y < ch; ++y) {
        for (std::int64_t x = 0; x < cw; ++x) {
          const std::int64_t sx = flip ? left + cw - 1 - x : left + x;
          out.at(0, c, y, x) = src.at(0, c, top + y, sx);
        }
      }
    }
    return out;
  };
  return {window(pair.low), window(pair.high), pair.id};
}

std::vector<ImagePair> make_synthetic_fixture(std::int64_t n_pairs,
                                              std::int64_t size,
                                              std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("fixture needs at least one pair");
  if (size < 1) throw std::invalid_argument("fixture size must be positive");
  constexpr double kLo = 0.2, kHi = 0.9;
  std::vector<ImagePair> out;
  for (std::int64_t i = 0; i < n_pairs; ++i) {
    Rng rng = make_rng(seed, 0x10000 + static_cast<std::uint64_t>(i));
    Tensor high({1, 3, size, size});
    Tensor low({1, 3, size, size});
    const std::int64_t plane_size = size * size;
    for (std::int64_t c = 0; c < 3; ++c) {
      std::vector<double> plane(plane_size);
      for (double& v : plane) v = uniform(rng, kLo, kHi);
      blur_plane(plane, size, size, 4.0);
      const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
      const double lo = *mn, span = *mx - *mn;
      for (std::int64_t k = 0; k < plane_size; ++k) {
        const double v = span > 0.0 ? kLo + (kHi - kLo) * (plane[k] - lo) / span
                                    : 0.5 * (kLo + kHi);
        high[c * plane_size + k] = static_cast<float>(v);
      }
    }
    // Noise is drawn after all three channels so the high image does not
    // depend on how the low image is produced.
    for (std::int64_t k = 0; k < high.size(); ++k) {
      const double v = 0.3 * std::pow(static_cast<double>(high[k]), 2.5) +
                       0.01 * normal01(rng);
      low[k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    char id[32];
    std::snprintf(id, sizeof(id), "fixture_%03lld", static_cast<long long>(i));
    out.push_back({std::move(low), std::move(high), id});
  }
  return out;
}

std::pair<Tensor, Tensor> stack_batch(std::span<const ImagePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("stack_batch: empty batch");
  const Shape& one = pairs.front().low.shape();
  const std::int64_t n = static_cast<std::int64_t>(pairs.size());
  Tensor low({n, one[1], one[2], one[3]});
  Tensor high({n, one[1], one[2], one[3]});
  const std::int64_t stride = shape_numel(one);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    if (p.low.shape() != one || p.high.shape() != one) {
      throw ShapeError("stack_batch: pair '" + p.id + "' has shape " +
                       shape_str(p.low.shape()) + ", expected " + shape_str(one));
    }
    std::copy(p.low.data().begin(), p.low.data().end(), low.data().begin() + i * stride);
    std::copy(p.high.data().begin(), p.high.data().end(),
              high.data().begin() + i * stride);
  }
  return {std::move(low), std::move(high)};
}

void write_pairs(std::span<const ImagePair> pairs, const fs::path& root,
                 const std::string& low_subdir, const std::string& high_subdir) {
  fs::create_directories(root / low_subdir);
  fs::create_directories(root / high_subdir);
  for (const auto& p : pairs) {
    save_image(p.low, root / low_subdir / (p.id + ".png"));
    save_image(p.high, root / high_subdir / (p.id + ".png"));
  }
}

}  // namespace flight
