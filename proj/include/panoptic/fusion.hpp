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
#include <span>
#include <vector>

#include "panoptic/box_geometry.hpp"
#include "panoptic/panoptic_model.hpp"
#include "panoptic/tensor_ops.hpp"

namespace panoptic {

struct Detection {
  Box box;
  ClassId class_id = 0;
  double score = 0.0;
  MaskGrid mask;
};

struct FusionConfig {
  double coverage_threshold = 0.5;
  std::size_t stuff_min_area = 4096;
  double mask_threshold = 0.5;

  void validate() const;
};

struct FusionResult {
  PanopticMap panoptic;
  // Input indices of accepted detections, in segment-id order (id = k + 1).
  std::vector<std::size_t> accepted;
  // Input indices whose pasted mask was empty.
  std::vector<std::size_t> empty_masks;
};

// Claims pixels for detections in descending score order (ties by lower
// input index); an instance is kept only if its still-unassigned pixels
// cover at least `coverage_threshold` of its pasted mask. Leftover pixels
// take the semantic label when it is stuff, otherwise void; stuff classes
// with fewer than `stuff_min_area` pixels are voided. Instance segments get
// ids 1..n in processing order, stuff segments follow in class-id order.
FusionResult fuse(std::span<const Detection> detections,
                  const SemanticMap& semantic, const ClassTable& classes,
                  const FusionConfig& cfg = {});

}  // namespace panoptic
