// Copyright 2026 The Panoptic Core Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "panoptic/png_codec.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "panoptic/panoptic_model.hpp"

namespace panoptic {

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_from_cursor(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

[[noreturn]] void on_png_error(png_structp, png_const_charp message) {
  throw DecodeError(DecodeError::Kind::kMalformedImage,
                    std::string("PNG error: ") + message);
}

void on_png_warning(png_structp, png_const_charp) {}

// Owns the libpng read/write structs for the duration of one call.
class PngReader {
 public:
  PngReader() {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                  on_png_error, on_png_warning);
    if (png_ == nullptr) {
      throw std::runtime_error("png_create_read_struct failed");
    }
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw std::runtime_error("png_create_info_struct failed");
    }
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  PngWriter() {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                   on_png_error, on_png_warning);
    if (png_ == nullptr) {
      throw std::runtime_error("png_create_write_struct failed");
    }
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) {
      png_destroy_write_struct(&png_, nullptr);
      throw std::runtime_error("png_create_info_struct failed");
    }
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

RawImage decode_png(std::span<const std::uint8_t> bytes, PngLayout layout) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw DecodeError(DecodeError::Kind::kMalformedImage,
                      "not a PNG stream");
  }
  PngReader reader;
  ReadCursor cursor{bytes, 0};
  png_set_read_fn(reader.png(), &cursor, read_from_cursor);
  png_read_info(reader.png(), reader.info());

  const auto width = png_get_image_width(reader.png(), reader.info());
  const auto height = png_get_image_height(reader.png(), reader.info());
  const int bit_depth = png_get_bit_depth(reader.png(), reader.info());
  const int color_type = png_get_color_type(reader.png(), reader.info());

  if (bit_depth != 8) {
    throw DecodeError(DecodeError::Kind::kMalformedImage,
                      "expected an 8-bit PNG, got bit depth " +
                          std::to_string(bit_depth));
  }
  int channels = 0;
  if (layout == PngLayout::kRgb) {
    if (color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
      png_set_strip_alpha(reader.png());
    } else if (color_type != PNG_COLOR_TYPE_RGB) {
      throw DecodeError(DecodeError::Kind::kMalformedImage,
                        "expected an RGB PNG");
    }
    channels = 3;
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY) {
      throw DecodeError(DecodeError::Kind::kMalformedImage,
                        "expected a single-channel PNG");
    }
    channels = 1;
  }
  png_read_update_info(reader.png(), reader.info());

  RawImage image;
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.channels = channels;
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  image.data.resize(stride * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = image.data.data() + y * stride;
  }
  png_read_image(reader.png(), rows.data());
  png_read_end(reader.png(), nullptr);
  return image;
}

std::vector<std::uint8_t> encode_png(const RawImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw std::invalid_argument("encode_png supports 1 or 3 channels");
  }
  if (image.width <= 0 || image.height <= 0) {
    throw std::invalid_argument("encode_png requires a non-empty image");
  }
  const std::size_t stride =
      static_cast<std::size_t>(image.width) * image.channels;
  if (image.data.size() != stride * image.height) {
    throw std::invalid_argument("encode_png buffer size mismatch");
  }
  std::vector<std::uint8_t> out;
  PngWriter writer;
  png_set_write_fn(writer.png(), &out, write_to_vector, flush_noop);
  png_set_IHDR(writer.png(), writer.info(), image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(writer.png(), writer.info());
  for (int y = 0; y < image.height; ++y) {
    png_write_row(writer.png(), const_cast<png_bytep>(image.data.data() +
                                                      y * stride));
  }
  png_write_end(writer.png(), nullptr);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace panoptic
