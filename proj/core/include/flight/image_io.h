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

#ifndef FLIGHT_IMAGE_IO_H_
#define FLIGHT_IMAGE_IO_H_

#include <filesystem>
#include <stdexcept>

#include "flight/tensor.h"

namespace flight {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decodes an 8- or 16-bit RGB(A) PNG into a 1 x 3 x H x W tensor with values
// v / 255 (or v / 65535). Alpha is dropped, palettes are expanded, no gamma
// or colour management is applied. Grayscale images are rejected.
Tensor load_image(const std::filesystem::path& path);

// Clamps to [0, 1], rounds half away from zero and writes an 8-bit RGB PNG.
void save_image(const Tensor& image, const std::filesystem::path& path);

}  // namespace flight

#endif  // FLIGHT_IMAGE_IO_H_
