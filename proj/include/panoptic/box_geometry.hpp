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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace panoptic {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Axis-aligned box in center-size form, continuous image coordinates.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static Box from_corners(double x0, double y0, double x1, double y1) {
    return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
  }

  double x0() const { return cx - 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double x1() const { return cx + 0.5 * w; }
  double y1() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;

  bool operator==(const Box&) const = default;
};

struct Anchor {
  Box box;
  int level = 0;
};

// Offsets (o_u, o_v, o_w, o_h): center shift as a fraction of the reference
// size, log-scale size change.
struct BoxDelta {
  double du = 0.0;
  double dv = 0.0;
  double dw = 0.0;
  double dh = 0.0;

  bool operator==(const BoxDelta&) const = default;
};

struct ScoredBox {
  Box box;
  double score = 0.0;
  std::optional<std::uint32_t> class_id;
};

Box decode_box(const Box& ref, const BoxDelta& delta);
BoxDelta encode_box(const Box& ref, const Box& target);

double iou_box(const Box& a, const Box& b);

// Pyramid level an ROI of the given size is pooled from, in [1, 4].
int fpn_level(double w, double h);

struct AnchorLevel {
  double stride = 0.0;
  double area = 0.0;
};

struct NmsConfig {
  double objectness_iou = 0.7;
  double classwise_iou = 0.5;
};

struct AnchorConfig {
  std::vector<AnchorLevel> levels;
  std::vector<double> aspect_ratios;
  NmsConfig nms;

  // {levels:[{stride,area}], aspect_ratios:[...], nms:{objectness_iou,
  // classwise_iou}}
  static AnchorConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  // Strides {4, 8, 16, 32, 64}, area (2 * stride)^2, ratios
  // {0.2, 0.5, 1, 2, 5}.
  static AnchorConfig vistas();
};

// Anchors at ((i + 0.5) * stride, (j + 0.5) * stride) for every level and
// ratio, keeping only those entirely inside the image. Ordered by level,
// row, column, ratio. The anchor's level is its index in `levels`.
std::vector<Anchor> generate_anchors(int image_w, int image_h,
                                     std::span<const AnchorLevel> levels,
                                     std::span<const double> aspect_ratios);

// Greedy NMS. Returns kept input indices in processing order (descending
// score, ties by lower index).
std::vector<std::size_t> nms(std::span<const ScoredBox> boxes,
                             double iou_threshold, bool per_class);

Box clip_box(const Box& box, double image_w, double image_h);

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& value);

}  // namespace panoptic
