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
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "panoptic/box_geometry.hpp"
#include "panoptic/matching.hpp"
#include "panoptic/tensor_ops.hpp"

namespace panoptic {

// Per-pixel class probabilities, H x W x C (class fastest).
class SemanticProb {
 public:
  static SemanticProb create(int height, int width, int classes,
                             std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }
  double at(int y, int x, int c) const {
    return values_[(static_cast<std::size_t>(y) * width_ + x) * classes_ + c];
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int classes_ = 0;
  std::vector<double> values_;
};

// Per-pixel target class index into the probability vector.
class SemanticTarget {
 public:
  static SemanticTarget create(int height, int width, int classes,
                               std::vector<int> labels);

  int height() const { return height_; }
  int width() const { return width_; }
  int at(int y, int x) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> labels_;
};

double smooth_l1(double x);

struct SemanticLoss {
  double value = 0.0;
  // A selected pixel had probability 0 for its target class.
  bool saturated = false;
};

// Hard-mined log loss: the floor(WH/4) pixels with the lowest target
// probability (ties by row-major index) get weight 4/(WH), the rest 0.
SemanticLoss loss_semantic(const SemanticProb& probs,
                           const SemanticTarget& target);

struct RpnLoss {
  double objectness = 0.0;
  double box = 0.0;
  bool saturated = false;
  bool empty_match_set = false;
};

// Indices in `sampled` refer to `gt` (pair.gt) and to the per-anchor arrays
// `objectness`, `pred_boxes`, `anchors` (pair.pred / negatives).
RpnLoss loss_rpn(std::span<const double> objectness,
                 std::span<const Box> pred_boxes,
                 std::span<const Anchor> anchors, std::span<const Box> gt,
                 const MatchSet& sampled);

struct RshInputs {
  std::vector<Box> proposals;
  std::vector<LabeledBox> gt;
  // Per proposal, probabilities indexed by class slot; slot 0 is void.
  std::vector<std::vector<double>> class_probs;
  // Per proposal, class-specific refined boxes indexed by class slot; slot 0
  // is unused.
  std::vector<std::vector<Box>> class_boxes;
  // Per proposal; required for every positive.
  std::vector<std::optional<MaskGrid>> pred_masks;
  std::vector<std::optional<GtMask>> gt_masks;
  MatchSet sampled;
};

struct RshLoss {
  double classification = 0.0;
  double box = 0.0;
  double mask = 0.0;
  bool saturated = false;
  bool empty_match_set = false;
  // Positive proposals whose ground-truth mask is entirely void.
  std::vector<std::size_t> all_void_masks;
};

RshLoss loss_rsh(const RshInputs& inputs);

struct LossReport {
  double l_ss = 0.0;
  double l_rpn_ob = 0.0;
  double l_rpn_bb = 0.0;
  double l_rsh_cls = 0.0;
  double l_rsh_bb = 0.0;
  double l_rsh_msk = 0.0;
  std::vector<std::string> flags;

  // Non-finite values serialize as null and always carry a flag.
  nlohmann::json to_json() const;
};

}  // namespace panoptic
