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

#include "flight/image_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace flight {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; the message is parked here first. Only
// trivially destructible locals may live in the setjmp-protected functions.
struct PngErrorSlot {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp message) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", message);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  int bit_depth = 0;
  int channels = 0;
  std::size_t row_bytes = 0;
};

bool read_header(png_structp png, png_infop info, std::FILE* file,
                 PngHeader* header) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, file);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  header->color_type = png_get_color_type(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  if ((header->color_type & PNG_COLOR_MASK_COLOR) == 0) return true;
  if (header->color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->channels = png_get_channels(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  header->row_bytes = png_get_rowbytes(png, info);
  return true;
}

bool read_rows(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

bool write_rgb8(png_structp png, png_infop info, std::FILE* file,
                png_uint_32 width, png_uint_32 height, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, file);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ImageError("cannot open image " + path.string());

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw ImageError("not a PNG file: " + path.string());
  }

  PngErrorSlot slot;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot,
                                           on_png_error, on_png_warning);
  if (png == nullptr) throw ImageError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct ReadGuard {
    png_structp* png;
    png_infop* info;
    ~ReadGuard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (info == nullptr) throw ImageError("libpng initialisation failed");

  PngHeader header;
  if (!read_header(png, info, file.get(), &header)) {
    throw ImageError(path.string() + ": " + slot.message);
  }
  if ((header.color_type & PNG_COLOR_MASK_COLOR) == 0) {
    throw ImageError("image is not RGB (grayscale): " + path.string());
  }
  if (header.channels != 3 || (header.bit_depth != 8 && header.bit_depth != 16)) {
    throw ImageError("unsupported PNG layout: " + path.string());
  }

  const std::int64_t width = header.width, height = header.height;
  std::vector<png_byte> pixels(header.row_bytes * header.height);
  std::vector<png_bytep> rows(header.height);
  for (std::int64_t y = 0; y < height; ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * header.row_bytes;
  }
  if (!read_rows(png, rows.data())) {
    throw ImageError(path.string() + ": " + slot.message);
  }

  Tensor out({1, 3, height, width});
  const bool wide = header.bit_depth == 16;
  const double scale = wide ? 65535.0 : 255.0;
  for (std::int64_t y = 0; y < height; ++y) {
    const png_byte* row = rows[y];
    for (std::int64_t x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v;
        if (wide) {
          const png_byte* p = row + (x * 3 + c) * 2;
          v = static_cast<double>((p[0] << 8) | p[1]);  // big-endian samples
        } else {
          v = row[x * 3 + c];
        }
        out.at(0, c, y, x) = static_cast<float>(v / scale);
      }
    }
  }
  return out;
}

void save_image(const Tensor& image, const std::filesystem::path& path) {
  if (image.rank() != 4 || image.dim(0) != 1 || image.dim(1) != 3) {
    throw ShapeError("save_image expects a 1 x 3 x H x W tensor, got " +
                     shape_str(image.shape()));
  }
  const std::int64_t height = image.dim(2), width = image.dim(3);
  std::vector<png_byte> pixels(static_cast<std::size_t>(height * width * 3));
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v =
            std::clamp(static_cast<double>(image.at(0, c, y, x)), 0.0, 1.0);
        pixels[(y * width + x) * 3 + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (std::int64_t y = 0; y < height; ++y) rows[y] = pixels.data() + y * width * 3;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw ImageError("cannot write image " + path.string());

  PngErrorSlot slot;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot,
                                            on_png_error, on_png_warning);
  if (png == nullptr) throw ImageError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct WriteGuard {
    png_structp* png;
    png_infop* info;
    ~WriteGuard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (info == nullptr) throw ImageError("libpng initialisation failed");

  if (!write_rgb8(png, info, file.get(), static_cast<png_uint_32>(width),
                  static_cast<png_uint_32>(height), rows.data())) {
    throw ImageError(path.string() + ": " + slot.message);
  }
  if (std::fflush(file.get()) != 0) {
    throw ImageError("failed to flush image " + path.string());
  }
}

}  // namespace flight
