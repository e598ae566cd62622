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
#include "panoptic/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace panoptic {

namespace {

std::string dims(int c, int h, int w) {
  return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

// Bilinear sample at continuous feature coordinates (x, y), clamped to the
// grid; cell (i, j) is centered at (i + 0.5, j + 0.5).
double bilinear(const FeatureGrid& feat, int c, double x, double y) {
  const double u = std::clamp(x - 0.5, 0.0, feat.width() - 1.0);
  const double v = std::clamp(y - 0.5, 0.0, feat.height() - 1.0);
  const int x_lo = static_cast<int>(std::floor(u));
  const int y_lo = static_cast<int>(std::floor(v));
  const int x_hi = std::min(x_lo + 1, feat.width() - 1);
  const int y_hi = std::min(y_lo + 1, feat.height() - 1);
  const double lx = u - x_lo;
  const double ly = v - y_lo;
  return (1.0 - ly) * ((1.0 - lx) * feat.at(c, y_lo, x_lo) +
                       lx * feat.at(c, y_lo, x_hi)) +
         ly * ((1.0 - lx) * feat.at(c, y_hi, x_lo) +
               lx * feat.at(c, y_hi, x_hi));
}

}  // namespace

FeatureGrid::FeatureGrid(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw ShapeError("feature grid dimensions must be positive, got " +
                     dims(channels, height, width));
  }
  values_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

FeatureGrid::FeatureGrid(int channels, int height, int width,
                         std::vector<double> values)
    : FeatureGrid(channels, height, width) {
  if (values.size() != values_.size()) {
    throw ShapeError("feature grid " + dims(channels, height, width) +
                     " needs " + std::to_string(values_.size()) +
                     " values, got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ShapeError("feature grid values must be finite");
    }
  }
  values_ = std::move(values);
}

MaskGrid::MaskGrid(double fill) {
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw ShapeError("mask probabilities must lie in [0, 1]");
  }
  values_.fill(fill);
}

MaskGrid::MaskGrid(std::span<const double> values) {
  if (values.size() != kMaskCells) {
    throw ShapeError("a mask needs 784 values, got " +
                     std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < kMaskCells; ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw ShapeError("mask probability " + std::to_string(values[i]) +
                       " outside [0, 1] at cell " + std::to_string(i));
    }
    values_[i] = values[i];
  }
}

GtMask::GtMask(std::span<const std::uint8_t> labels) {
  if (labels.size() != kMaskCells) {
    throw ShapeError("a ground-truth mask needs 784 labels, got " +
                     std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < kMaskCells; ++i) {
    if (labels[i] != 0 && labels[i] != 1 && labels[i] != kVoid) {
      throw ShapeError("ground-truth mask labels are 0, 1 or void");
    }
    labels_[i] = labels[i];
  }
}

std::size_t BinaryGrid::count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(),
                    [](std::uint8_t v) { return v != 0; }));
}

ConvWeights ConvWeights::zeros(int out_channels, int in_channels, int kernel) {
  ConvWeights w{out_channels, in_channels, kernel, {}};
  w.validate();
  w.values.assign(static_cast<std::size_t>(out_channels) * in_channels *
                      kernel * kernel,
                  0.0);
  return w;
}

void ConvWeights::validate() const {
  if (out_channels <= 0 || in_channels <= 0 || kernel <= 0) {
    throw ShapeError("convolution weights need positive dimensions");
  }
  const std::size_t expected = static_cast<std::size_t>(out_channels) *
                               in_channels * kernel * kernel;
  if (!values.empty() && values.size() != expected) {
    throw ShapeError("convolution weights " + std::to_string(out_channels) +
                     "x" + std::to_string(in_channels) + "x" +
                     std::to_string(kernel) + "x" + std::to_string(kernel) +
                     " need " + std::to_string(expected) + " values, got " +
                     std::to_string(values.size()));
  }
}

FeatureGrid roi_align(const FeatureGrid& feat, const Box& box, int out_size) {
  if (!box.valid()) {
    throw GeometryError("roi_align needs a non-degenerate box");
  }
  if (out_size <= 0) {
    throw ShapeError("roi_align output size must be positive");
  }
  FeatureGrid out(feat.channels(), out_size, out_size);
  const double bin_w = box.w / out_size;
  const double bin_h = box.h / out_size;
  const double x0 = box.x0();
  const double y0 = box.y0();
  for (int c = 0; c < feat.channels(); ++c) {
    for (int ph = 0; ph < out_size; ++ph) {
      for (int pw = 0; pw < out_size; ++pw) {
        double sum = 0.0;
        for (int iy = 0; iy < 2; ++iy) {
          const double y = y0 + ph * bin_h + (iy + 0.5) * 0.5 * bin_h;
          for (int ix = 0; ix < 2; ++ix) {
            const double x = x0 + pw * bin_w + (ix + 0.5) * 0.5 * bin_w;
            sum += bilinear(feat, c, x, y);
          }
        }
        out.at(c, ph, pw) = sum / 4.0;
      }
    }
  }
  return out;
}

FeatureGrid avg_pool_replicate(const FeatureGrid& feat, int kernel) {
  if (kernel <= 0 || kernel > feat.height() || kernel > feat.width()) {
    throw ShapeError("pooling kernel " + std::to_string(kernel) +
                     " does not fit a " + std::to_string(feat.height()) + "x" +
                     std::to_string(feat.width()) + " input");
  }
  const int valid_h = feat.height() - kernel + 1;
  const int valid_w = feat.width() - kernel + 1;
  const int before = (kernel - 1) / 2;
  const double window = static_cast<double>(kernel) * kernel;

  FeatureGrid pooled(feat.channels(), valid_h, valid_w);
  for (int c = 0; c < feat.channels(); ++c) {
    for (int y = 0; y < valid_h; ++y) {
      for (int x = 0; x < valid_w; ++x) {
        double sum = 0.0;
        for (int ky = 0; ky < kernel; ++ky) {
          for (int kx = 0; kx < kernel; ++kx) {
            sum += feat.at(c, y + ky, x + kx);
          }
        }
        pooled.at(c, y, x) = sum / window;
      }
    }
  }

  FeatureGrid out(feat.channels(), feat.height(), feat.width());
  for (int c = 0; c < feat.channels(); ++c) {
    for (int y = 0; y < feat.height(); ++y) {
      const int sy = std::clamp(y - before, 0, valid_h - 1);
      for (int x = 0; x < feat.width(); ++x) {
        const int sx = std::clamp(x - before, 0, valid_w - 1);
        out.at(c, y, x) = pooled.at(c, sy, sx);
      }
    }
  }
  return out;
}

FeatureGrid conv2d(const FeatureGrid& feat, const ConvWeights& weights,
                   int dilation, int stride, int padding) {
  weights.validate();
  if (weights.values.empty()) {
    throw ShapeError("convolution weights are empty");
  }
  if (weights.in_channels != feat.channels()) {
    throw ShapeError("convolution expects " +
                     std::to_string(weights.in_channels) +
                     " input channels, got " +
                     std::to_string(feat.channels()));
  }
  if (dilation <= 0 || stride <= 0 || padding < 0) {
    throw ShapeError("convolution needs dilation, stride > 0, padding >= 0");
  }
  const int span = dilation * (weights.kernel - 1) + 1;
  const int out_h = (feat.height() + 2 * padding - span) / stride + 1;
  const int out_w = (feat.width() + 2 * padding - span) / stride + 1;
  if (feat.height() + 2 * padding < span || feat.width() + 2 * padding < span) {
    throw ShapeError("convolution kernel span " + std::to_string(span) +
                     " exceeds the padded input");
  }

  FeatureGrid out(weights.out_channels, out_h, out_w);
  for (int o = 0; o < weights.out_channels; ++o) {
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        double sum = 0.0;
        for (int i = 0; i < weights.in_channels; ++i) {
          for (int ky = 0; ky < weights.kernel; ++ky) {
            const int y = oy * stride - padding + ky * dilation;
            if (y < 0 || y >= feat.height()) continue;
            for (int kx = 0; kx < weights.kernel; ++kx) {
              const int x = ox * stride - padding + kx * dilation;
              if (x < 0 || x >= feat.width()) continue;
              sum += weights.at(o, i, ky, kx) * feat.at(i, y, x);
            }
          }
        }
        out.at(o, oy, ox) = sum;
      }
    }
  }
  return out;
}

MiniDLWeights MiniDLWeights::zeros(int in_channels, int pool_kernel) {
  MiniDLWeights w;
  w.dilation1 = ConvWeights::zeros(kMiniDLChannels, in_channels, 3);
  w.dilation6 = ConvWeights::zeros(kMiniDLChannels, in_channels, 3);
  w.pool_projection = ConvWeights::zeros(kMiniDLChannels, in_channels, 1);
  w.output = ConvWeights::zeros(kMiniDLChannels, 3 * kMiniDLChannels, 3);
  w.pool_kernel = pool_kernel;
  return w;
}

void MiniDLWeights::validate(int in_channels) const {
  auto check = [](const ConvWeights& w, const char* name, int in, int k) {
    w.validate();
    if (w.out_channels != kMiniDLChannels || w.in_channels != in ||
        w.kernel != k || w.values.empty()) {
      throw ShapeError(std::string("MiniDL weight '") + name +
                       "' must be " + std::to_string(kMiniDLChannels) + "x" +
                       std::to_string(in) + "x" + std::to_string(k) + "x" +
                       std::to_string(k));
    }
  };
  check(dilation1, "dilation1", in_channels, 3);
  check(dilation6, "dilation6", in_channels, 3);
  check(pool_projection, "pool_projection", in_channels, 1);
  check(output, "output", 3 * kMiniDLChannels, 3);
  if (pool_kernel <= 0) {
    throw ShapeError("MiniDL pooling kernel must be positive");
  }
}

FeatureGrid minidl_forward(const FeatureGrid& feat,
                           const MiniDLWeights& weights) {
  weights.validate(feat.channels());
  const FeatureGrid branch_a = conv2d(feat, weights.dilation1, 1, 1, 1);
  const FeatureGrid branch_b = conv2d(feat, weights.dilation6, 6, 1, 6);
  const FeatureGrid branch_c = conv2d(
      avg_pool_replicate(feat, weights.pool_kernel), weights.pool_projection);

  FeatureGrid concat(3 * kMiniDLChannels, feat.height(), feat.width());
  const std::size_t plane = static_cast<std::size_t>(kMiniDLChannels) *
                            feat.height() * feat.width();
  auto dst = concat.values().begin();
  std::copy(branch_a.values().begin(), branch_a.values().end(), dst);
  std::copy(branch_b.values().begin(), branch_b.values().end(), dst + plane);
  std::copy(branch_c.values().begin(), branch_c.values().end(),
            dst + 2 * plane);
  return conv2d(concat, weights.output, 1, 1, 1);
}

PixelRect box_pixel_rect(const Box& box) {
  return {static_cast<int>(std::floor(box.x0())),
          static_cast<int>(std::floor(box.y0())),
          static_cast<int>(std::ceil(box.x1())),
          static_cast<int>(std::ceil(box.y1()))};
}

BinaryGrid paste_mask(const MaskGrid& mask, const Box& box, int image_w,
                      int image_h, double threshold) {
  if (!box.valid()) {
    throw GeometryError("paste_mask needs a non-degenerate box");
  }
  if (image_w <= 0 || image_h <= 0) {
    throw ShapeError("paste_mask needs a non-empty image");
  }
  BinaryGrid out{image_w, image_h,
                 std::vector<std::uint8_t>(
                     static_cast<std::size_t>(image_w) * image_h, 0)};
  const int origin_x = static_cast<int>(std::floor(box.x0()));
  const int origin_y = static_cast<int>(std::floor(box.y0()));
  const int resized_w = static_cast<int>(std::ceil(box.w));
  const int resized_h = static_cast<int>(std::ceil(box.h));
  const double scale_x = static_cast<double>(kMaskSize) / resized_w;
  const double scale_y = static_cast<double>(kMaskSize) / resized_h;

  const int x_begin = std::max(origin_x, 0);
  const int y_begin = std::max(origin_y, 0);
  const int x_end = std::min(origin_x + resized_w, image_w);
  const int y_end = std::min(origin_y + resized_h, image_h);
  for (int y = y_begin; y < y_end; ++y) {
    const double sy = std::clamp((y - origin_y + 0.5) * scale_y - 0.5, 0.0,
                                 kMaskSize - 1.0);
    const int r0 = static_cast<int>(std::floor(sy));
    const int r1 = std::min(r0 + 1, kMaskSize - 1);
    const double fy = sy - r0;
    for (int x = x_begin; x < x_end; ++x) {
      const double sx = std::clamp((x - origin_x + 0.5) * scale_x - 0.5, 0.0,
                                   kMaskSize - 1.0);
      const int c0 = static_cast<int>(std::floor(sx));
      const int c1 = std::min(c0 + 1, kMaskSize - 1);
      const double fx = sx - c0;
      const double value =
          (1.0 - fy) * ((1.0 - fx) * mask.at(r0, c0) + fx * mask.at(r0, c1)) +
          fy * ((1.0 - fx) * mask.at(r1, c0) + fx * mask.at(r1, c1));
      if (value > threshold) {
        out.values[static_cast<std::size_t>(y) * image_w + x] = 1;
      }
    }
  }
  return out;
}

GtMask rasterize_gt_mask(const BinaryGrid& mask, const BinaryGrid* void_mask,
                         const Box& box) {
  if (!box.valid()) {
    throw GeometryError("rasterize_gt_mask needs a non-degenerate box");
  }
  if (void_mask != nullptr &&
      (void_mask->width != mask.width || void_mask->height != mask.height)) {
    throw ShapeError("void mask must match the instance mask size");
  }
  std::array<std::uint8_t, kMaskCells> labels{};
  const double cell_w = box.w / kMaskSize;
  const double cell_h = box.h / kMaskSize;
  const double cell_area = cell_w * cell_h;
  for (int r = 0; r < kMaskSize; ++r) {
    const double cy0 = box.y0() + r * cell_h;
    const double cy1 = cy0 + cell_h;
    for (int c = 0; c < kMaskSize; ++c) {
      const double cx0 = box.x0() + c * cell_w;
      const double cx1 = cx0 + cell_w;
      double fg = 0.0;
      double vd = 0.0;
      const int py_begin = std::max(static_cast<int>(std::floor(cy0)), 0);
      const int py_end = std::min(static_cast<int>(std::ceil(cy1)), mask.height);
      const int px_begin = std::max(static_cast<int>(std::floor(cx0)), 0);
      const int px_end = std::min(static_cast<int>(std::ceil(cx1)), mask.width);
      for (int py = py_begin; py < py_end; ++py) {
        const double oy = std::min(cy1, py + 1.0) - std::max(cy0, double(py));
        if (oy <= 0.0) continue;
        for (int px = px_begin; px < px_end; ++px) {
          const double ox =
              std::min(cx1, px + 1.0) - std::max(cx0, double(px));
          if (ox <= 0.0) continue;
          if (void_mask != nullptr && void_mask->at(px, py) != 0) {
            vd += ox * oy;
          } else if (mask.at(px, py) != 0) {
            fg += ox * oy;
          }
        }
      }
      std::uint8_t label = 0;
      if (vd > 0.5 * cell_area) {
        label = GtMask::kVoid;
      } else if (fg > 0.5 * cell_area) {
        label = 1;
      }
      labels[r * kMaskSize + c] = label;
    }
  }
  return GtMask(labels);
}

}  // namespace panoptic
