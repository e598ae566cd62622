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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "panoptic/box_geometry.hpp"

namespace panoptic {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense C x H x W grid of reals, channel-major then row-major.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int channels, int height, int width, double fill = 0.0);
  FeatureGrid(int channels, int height, int width, std::vector<double> values);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool operator==(const FeatureGrid&) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

inline constexpr int kMaskSize = 28;
inline constexpr std::size_t kMaskCells = kMaskSize * kMaskSize;

// 28 x 28 mask probabilities in [0, 1], row-major.
class MaskGrid {
 public:
  MaskGrid() { values_.fill(0.0); }
  explicit MaskGrid(double fill);
  explicit MaskGrid(std::span<const double> values);

  double at(int row, int col) const { return values_[row * kMaskSize + col]; }
  const std::array<double, kMaskCells>& values() const { return values_; }

  bool operator==(const MaskGrid&) const = default;

 private:
  std::array<double, kMaskCells> values_;
};

// 28 x 28 ternary ground-truth mask: 0, 1, or void.
class GtMask {
 public:
  static constexpr std::uint8_t kVoid = 255;

  GtMask() { labels_.fill(0); }
  explicit GtMask(std::span<const std::uint8_t> labels);

  std::uint8_t at(int row, int col) const {
    return labels_[row * kMaskSize + col];
  }
  bool is_void(int row, int col) const { return at(row, col) == kVoid; }
  const std::array<std::uint8_t, kMaskCells>& labels() const { return labels_; }

  bool operator==(const GtMask&) const = default;

 private:
  std::array<std::uint8_t, kMaskCells> labels_;
};

// Binary image-sized grid (0/1), row-major.
struct BinaryGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count() const;
};

// Weights laid out out_channels x in_channels x kernel x kernel.
struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int kernel = 0;
  std::vector<double> values;

  double at(int o, int i, int ky, int kx) const {
    return values[((static_cast<std::size_t>(o) * in_channels + i) * kernel +
                   ky) *
                      kernel +
                  kx];
  }
  static ConvWeights zeros(int out_channels, int in_channels, int kernel);
  void validate() const;
};

// ROIAlign over `box` in feature coordinates. Each output cell averages a
// 2 x 2 grid of bilinear samples; feature cell (i, j) sits at (i + 0.5,
// j + 0.5). Samples outside the grid are clamped to the border.
FeatureGrid roi_align(const FeatureGrid& feat, const Box& box,
                      int out_size = 14);

// Stride-1 valid average pooling with a K x K window, then replicate padding
// of floor((K-1)/2) before and ceil((K-1)/2) after to restore H x W.
FeatureGrid avg_pool_replicate(const FeatureGrid& feat, int kernel);

// Zero-padded cross-correlation with dilation.
FeatureGrid conv2d(const FeatureGrid& feat, const ConvWeights& weights,
                   int dilation = 1, int stride = 1, int padding = 0);

inline constexpr int kMiniDLChannels = 128;

struct MiniDLWeights {
  ConvWeights dilation1;        // 128 x C x 3 x 3
  ConvWeights dilation6;        // 128 x C x 3 x 3
  ConvWeights pool_projection;  // 128 x C x 1 x 1
  ConvWeights output;           // 128 x 384 x 3 x 3
  int pool_kernel = 64;

  static MiniDLWeights zeros(int in_channels, int pool_kernel = 64);
  void validate(int in_channels) const;
};

FeatureGrid minidl_forward(const FeatureGrid& feat,
                           const MiniDLWeights& weights);

// Integer pixel rectangle [x0, x1) x [y0, y1) covered by a box: from
// floor of the low corner to ceil of the high corner.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};
PixelRect box_pixel_rect(const Box& box);

// Resizes the mask bilinearly to ceil(w) x ceil(h) (half-pixel centers),
// places it at the box's pixel origin, clips to the image and thresholds
// with a strict > comparison.
BinaryGrid paste_mask(const MaskGrid& mask, const Box& box, int image_w,
                      int image_h, double threshold = 0.5);

// Crops a full-image binary mask to `box` and rasterizes it to 28 x 28: a
// cell is void when more than half of its area is void, else foreground
// when more than half of its area is foreground.
GtMask rasterize_gt_mask(const BinaryGrid& mask, const BinaryGrid* void_mask,
                         const Box& box);

}  // namespace panoptic
