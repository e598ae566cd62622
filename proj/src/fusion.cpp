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
#include "panoptic/fusion.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace panoptic {

void FusionConfig::validate() const {
  if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0)) {
    throw std::invalid_argument("coverage threshold must lie in (0, 1]");
  }
  if (!(mask_threshold >= 0.0 && mask_threshold <= 1.0)) {
    throw std::invalid_argument("mask threshold must lie in [0, 1]");
  }
}

FusionResult fuse(std::span<const Detection> detections,
                  const SemanticMap& semantic, const ClassTable& classes,
                  const FusionConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    if (!classes.contains(det.class_id) || !classes.is_thing(det.class_id)) {
      throw std::invalid_argument("detection " + std::to_string(i) +
                                  " has class " +
                                  std::to_string(det.class_id) +
                                  " which is not a thing class");
    }
    if (!(det.score >= 0.0 && det.score <= 1.0)) {
      throw std::invalid_argument("detection " + std::to_string(i) +
                                  " has a score outside [0, 1]");
    }
  }

  const int width = semantic.width();
  const int height = semantic.height();
  const std::size_t pixel_count = static_cast<std::size_t>(width) * height;
  std::vector<SegmentId> pixels(pixel_count, kVoidId);
  std::map<SegmentId, ClassId> segments;
  FusionResult result;

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return detections[a].score > detections[b].score;
                   });

  SegmentId next_id = 1;
  std::vector<std::uint32_t> claim;
  for (std::size_t index : order) {
    const Detection& det = detections[index];
    const BinaryGrid mask = paste_mask(det.mask, det.box, width, height,
                                       cfg.mask_threshold);
    std::size_t area = 0;
    claim.clear();
    for (std::size_t p = 0; p < pixel_count; ++p) {
      if (mask.values[p] == 0) continue;
      ++area;
      if (pixels[p] == kVoidId) claim.push_back(static_cast<std::uint32_t>(p));
    }
    if (area == 0) {
      result.empty_masks.push_back(index);
      continue;
    }
    if (static_cast<double>(claim.size()) <
        cfg.coverage_threshold * static_cast<double>(area)) {
      continue;
    }
    const SegmentId id = next_id++;
    for (std::uint32_t p : claim) pixels[p] = id;
    segments.emplace(id, det.class_id);
    result.accepted.push_back(index);
  }

  // Leftover pixels: stuff label or void, then the per-class area filter.
  std::map<ClassId, std::size_t> stuff_area;
  std::vector<ClassId> stuff_label(pixel_count, kVoidId);
  for (std::size_t p = 0; p < pixel_count; ++p) {
    if (pixels[p] != kVoidId) continue;
    const ClassId label = semantic.labels()[p];
    if (label == kVoidId || !classes.is_stuff(label)) continue;
    stuff_label[p] = label;
    ++stuff_area[label];
  }
  std::map<ClassId, SegmentId> stuff_ids;
  for (const auto& [class_id, area] : stuff_area) {
    if (area < cfg.stuff_min_area) continue;
    const SegmentId id = next_id++;
    stuff_ids.emplace(class_id, id);
    segments.emplace(id, class_id);
  }
  for (std::size_t p = 0; p < pixel_count; ++p) {
    if (stuff_label[p] == kVoidId) continue;
    auto it = stuff_ids.find(stuff_label[p]);
    if (it != stuff_ids.end()) pixels[p] = it->second;
  }

  result.panoptic = PanopticMap::create(width, height, std::move(pixels),
                                        std::move(segments), classes);
  return result;
}

}  // namespace panoptic
