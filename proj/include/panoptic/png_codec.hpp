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
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace panoptic {

// Decoded 8-bit image, interleaved channels, row-major.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

enum class PngLayout { kRgb, kGray };

// Decodes an 8-bit PNG. kRgb accepts RGB and RGBA (alpha dropped); kGray
// accepts single-channel grayscale only. Anything else throws DecodeError.
RawImage decode_png(std::span<const std::uint8_t> bytes, PngLayout layout);

// Encodes 1 (gray) or 3 (RGB) channel 8-bit data.
std::vector<std::uint8_t> encode_png(const RawImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace panoptic
