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
#include "panoptic/box_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace panoptic {

bool Box::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
         std::isfinite(h) && w > 0.0 && h > 0.0;
}

namespace {

void require_valid(const Box& box, const char* what) {
  if (!box.valid()) {
    throw GeometryError(std::string(what) + " is not a valid box");
  }
}

}  // namespace

Box decode_box(const Box& ref, const BoxDelta& delta) {
  require_valid(ref, "reference");
  if (!std::isfinite(delta.du) || !std::isfinite(delta.dv) ||
      !std::isfinite(delta.dw) || !std::isfinite(delta.dh)) {
    throw GeometryError("box delta has non-finite components");
  }
  return {ref.cx + delta.du * ref.w, ref.cy + delta.dv * ref.h,
          ref.w * std::exp(delta.dw), ref.h * std::exp(delta.dh)};
}

BoxDelta encode_box(const Box& ref, const Box& target) {
  require_valid(ref, "reference");
  require_valid(target, "target");
  return {(target.cx - ref.cx) / ref.w, (target.cy - ref.cy) / ref.h,
          std::log(target.w / ref.w), std::log(target.h / ref.h)};
}

double iou_box(const Box& a, const Box& b) {
  const double iw = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
  const double ih = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

int fpn_level(double w, double h) {
  if (!(w > 0.0) || !(h > 0.0)) {
    throw GeometryError("fpn_level needs positive dimensions");
  }
  const double k = std::floor(3.0 + std::log2(std::sqrt(w * h) / 224.0));
  return static_cast<int>(std::clamp(k, 1.0, 4.0));
}

AnchorConfig AnchorConfig::from_json(const nlohmann::json& doc) {
  AnchorConfig cfg;
  for (const auto& level : doc.at("levels")) {
    cfg.levels.push_back(
        {level.at("stride").get<double>(), level.at("area").get<double>()});
  }
  cfg.aspect_ratios = doc.at("aspect_ratios").get<std::vector<double>>();
  if (doc.contains("nms")) {
    const auto& nms_doc = doc["nms"];
    cfg.nms.objectness_iou =
        nms_doc.value("objectness_iou", cfg.nms.objectness_iou);
    cfg.nms.classwise_iou = nms_doc.value("classwise_iou", cfg.nms.classwise_iou);
  }
  return cfg;
}

nlohmann::json AnchorConfig::to_json() const {
  nlohmann::json levels_doc = nlohmann::json::array();
  for (const auto& level : levels) {
    levels_doc.push_back({{"stride", level.stride}, {"area", level.area}});
  }
  return {{"levels", levels_doc},
          {"aspect_ratios", aspect_ratios},
          {"nms",
           {{"objectness_iou", nms.objectness_iou},
            {"classwise_iou", nms.classwise_iou}}}};
}

AnchorConfig AnchorConfig::vistas() {
  AnchorConfig cfg;
  for (double stride : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    cfg.levels.push_back({stride, (2.0 * stride) * (2.0 * stride)});
  }
  cfg.aspect_ratios = {0.2, 0.5, 1.0, 2.0, 5.0};
  return cfg;
}

std::vector<Anchor> generate_anchors(int image_w, int image_h,
                                     std::span<const AnchorLevel> levels,
                                     std::span<const double> aspect_ratios) {
  if (aspect_ratios.empty()) {
    throw GeometryError("generate_anchors needs at least one aspect ratio");
  }
  if (image_w <= 0 || image_h <= 0) {
    throw GeometryError("generate_anchors needs a non-empty image");
  }
  for (double ratio : aspect_ratios) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
      throw GeometryError("aspect ratios must be positive");
    }
  }
  std::vector<Anchor> anchors;
  for (std::size_t level = 0; level < levels.size(); ++level) {
    const auto [stride, area] = levels[level];
    if (!(stride > 0.0) || !(area > 0.0)) {
      throw GeometryError("anchor level " + std::to_string(level) +
                          " needs positive stride and area");
    }
    std::vector<std::pair<double, double>> dims;
    for (double ratio : aspect_ratios) {
      dims.emplace_back(std::sqrt(area * ratio), std::sqrt(area / ratio));
    }
    for (int j = 0; (j + 0.5) * stride < image_h; ++j) {
      const double cy = (j + 0.5) * stride;
      for (int i = 0; (i + 0.5) * stride < image_w; ++i) {
        const double cx = (i + 0.5) * stride;
        for (const auto& [w, h] : dims) {
          const Box box{cx, cy, w, h};
          if (box.x0() >= 0.0 && box.y0() >= 0.0 && box.x1() <= image_w &&
              box.y1() <= image_h) {
            anchors.push_back({box, static_cast<int>(level)});
          }
        }
      }
    }
  }
  return anchors;
}

std::vector<std::size_t> nms(std::span<const ScoredBox> boxes,
                             double iou_threshold, bool per_class) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw GeometryError("NMS threshold must lie in (0, 1]");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return boxes[a].score > boxes[b].score;
                   });
  std::vector<std::size_t> kept;
  for (std::size_t candidate : order) {
    const ScoredBox& box = boxes[candidate];
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (per_class && boxes[k].class_id != box.class_id) continue;
      if (iou_box(boxes[k].box, box.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

Box clip_box(const Box& box, double image_w, double image_h) {
  const double x0 = std::max(box.x0(), 0.0);
  const double y0 = std::max(box.y0(), 0.0);
  const double x1 = std::min(box.x1(), image_w);
  const double y1 = std::min(box.y1(), image_h);
  if (!(x1 > x0) || !(y1 > y0)) {
    throw GeometryError("box lies entirely outside the image");
  }
  return Box::from_corners(x0, y0, x1, y1);
}

nlohmann::json box_to_json(const Box& box) {
  return nlohmann::json::array({box.cx, box.cy, box.w, box.h});
}

Box box_from_json(const nlohmann::json& value) {
  if (!value.is_array() || value.size() != 4) {
    throw GeometryError("a box is [cx, cy, w, h], got " + value.dump());
  }
  Box box{value[0].get<double>(), value[1].get<double>(),
          value[2].get<double>(), value[3].get<double>()};
  if (!box.valid()) {
    throw GeometryError("invalid box " + value.dump());
  }
  return box;
}

}  // namespace panoptic
