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
#include "panoptic/loss_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace panoptic {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// -log(p), saturating to +inf at p == 0.
double neg_log(double p, bool& saturated) {
  if (p <= 0.0) {
    saturated = true;
    return kInfinity;
  }
  return -std::log(p);
}

double box_regression_term(const Box& target, const Box& pred, double ref_w,
                           double ref_h) {
  return smooth_l1((target.cx - pred.cx) / ref_w) +
         smooth_l1((target.cy - pred.cy) / ref_h) +
         smooth_l1(std::log(pred.w / target.w)) +
         smooth_l1(std::log(pred.h / target.h));
}

template <typename T>
const T& checked(std::span<const T> items, std::size_t index,
                 const char* what) {
  if (index >= items.size()) {
    throw std::out_of_range(std::string(what) + " index " +
                            std::to_string(index) + " out of range");
  }
  return items[index];
}

}  // namespace

SemanticProb SemanticProb::create(int height, int width, int classes,
                                  std::vector<double> values) {
  if (height <= 0 || width <= 0 || classes <= 0) {
    throw std::invalid_argument("semantic probabilities need positive shape");
  }
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  if (values.size() != pixels * classes) {
    throw std::invalid_argument("semantic probabilities need H*W*C values");
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      const double v = values[p * classes + c];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("probability outside [0, 1] at pixel " +
                                    std::to_string(p));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("probabilities at pixel " +
                                  std::to_string(p) + " sum to " +
                                  std::to_string(sum));
    }
  }
  SemanticProb out;
  out.height_ = height;
  out.width_ = width;
  out.classes_ = classes;
  out.values_ = std::move(values);
  return out;
}

SemanticTarget SemanticTarget::create(int height, int width, int classes,
                                      std::vector<int> labels) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("semantic target needs positive shape");
  }
  if (labels.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("semantic target needs H*W labels");
  }
  for (int label : labels) {
    if (label < 0 || label >= classes) {
      throw std::invalid_argument("semantic target label " +
                                  std::to_string(label) + " out of range");
    }
  }
  SemanticTarget out;
  out.height_ = height;
  out.width_ = width;
  out.labels_ = std::move(labels);
  return out;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

SemanticLoss loss_semantic(const SemanticProb& probs,
                           const SemanticTarget& target) {
  if (probs.height() != target.height() || probs.width() != target.width()) {
    throw std::invalid_argument("semantic prediction and target differ in size");
  }
  const int width = probs.width();
  const std::size_t pixels = static_cast<std::size_t>(probs.height()) * width;
  std::vector<double> target_prob(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const int y = static_cast<int>(i / width);
    const int x = static_cast<int>(i % width);
    target_prob[i] = probs.at(y, x, target.at(y, x));
  }
  const std::size_t selected = pixels / 4;
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + selected, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (target_prob[a] != target_prob[b]) {
                        return target_prob[a] < target_prob[b];
                      }
                      return a < b;
                    });
  SemanticLoss out;
  double sum = 0.0;
  for (std::size_t k = 0; k < selected; ++k) {
    sum += neg_log(target_prob[order[k]], out.saturated);
  }
  out.value = (4.0 / static_cast<double>(pixels)) * sum;
  return out;
}

RpnLoss loss_rpn(std::span<const double> objectness,
                 std::span<const Box> pred_boxes,
                 std::span<const Anchor> anchors, std::span<const Box> gt,
                 const MatchSet& sampled) {
  if (objectness.size() != anchors.size() ||
      pred_boxes.size() != anchors.size()) {
    throw std::invalid_argument(
        "objectness scores and predicted boxes must be given per anchor");
  }
  RpnLoss out;
  const std::size_t total = sampled.size();
  if (total == 0) {
    out.empty_match_set = true;
    return out;
  }
  double ob = 0.0;
  double bb = 0.0;
  for (const auto& pair : sampled.positives) {
    const double s = checked(objectness, pair.pred, "anchor");
    ob += neg_log(s, out.saturated);
    const Box& target = checked(gt, pair.gt, "ground truth");
    const Box& anchor = checked(anchors, pair.pred, "anchor").box;
    bb += box_regression_term(target, pred_boxes[pair.pred], anchor.w,
                              anchor.h);
  }
  for (std::size_t pred : sampled.negatives) {
    ob += neg_log(1.0 - checked(objectness, pred, "anchor"), out.saturated);
  }
  out.objectness = ob / static_cast<double>(total);
  out.box = bb / static_cast<double>(total);
  return out;
}

RshLoss loss_rsh(const RshInputs& in) {
  const std::size_t n = in.proposals.size();
  if (in.class_probs.size() != n || in.class_boxes.size() != n ||
      in.pred_masks.size() != n || in.gt_masks.size() != n) {
    throw std::invalid_argument(
        "class probabilities, class boxes and masks must be given per "
        "proposal");
  }
  RshLoss out;
  const std::size_t total = in.sampled.size();
  if (total == 0) {
    out.empty_match_set = true;
    return out;
  }
  const std::span<const Box> proposals(in.proposals);
  const std::span<const LabeledBox> gt(in.gt);

  double cls = 0.0;
  double bb = 0.0;
  double msk = 0.0;
  for (const auto& pair : in.sampled.positives) {
    const Box& proposal = checked(proposals, pair.pred, "proposal");
    const LabeledBox& target = checked(gt, pair.gt, "ground truth");
    const std::span<const double> probs(in.class_probs[pair.pred]);
    const std::span<const Box> boxes(in.class_boxes[pair.pred]);
    cls += neg_log(checked(probs, target.class_id, "class slot"),
                   out.saturated);
    bb += box_regression_term(target.box,
                              checked(boxes, target.class_id, "class slot"),
                              proposal.w, proposal.h);

    const auto& pred_mask = in.pred_masks[pair.pred];
    const auto& gt_mask = in.gt_masks[pair.pred];
    if (!pred_mask || !gt_mask) {
      throw std::invalid_argument("positive proposal " +
                                  std::to_string(pair.pred) +
                                  " needs predicted and ground-truth masks");
    }
    double cell_sum = 0.0;
    std::size_t non_void = 0;
    for (int r = 0; r < kMaskSize; ++r) {
      for (int c = 0; c < kMaskSize; ++c) {
        if (gt_mask->is_void(r, c)) continue;
        ++non_void;
        const double p = pred_mask->at(r, c);
        cell_sum += gt_mask->at(r, c) == 1 ? neg_log(p, out.saturated)
                                           : neg_log(1.0 - p, out.saturated);
      }
    }
    if (non_void == 0) {
      out.all_void_masks.push_back(pair.pred);
    } else {
      msk += cell_sum / static_cast<double>(non_void);
    }
  }
  for (std::size_t pred : in.sampled.negatives) {
    checked(proposals, pred, "proposal");
    const std::span<const double> probs(in.class_probs[pred]);
    cls += neg_log(checked(probs, std::size_t{0}, "class slot"),
                   out.saturated);
  }
  const double denom = static_cast<double>(total);
  out.classification = cls / denom;
  out.box = bb / denom;
  out.mask = msk / denom;
  return out;
}

nlohmann::json LossReport::to_json() const {
  auto value = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {{"l_ss", value(l_ss)},
          {"l_rpn_ob", value(l_rpn_ob)},
          {"l_rpn_bb", value(l_rpn_bb)},
          {"l_rsh_cls", value(l_rsh_cls)},
          {"l_rsh_bb", value(l_rsh_bb)},
          {"l_rsh_msk", value(l_rsh_msk)},
          {"flags", flags}};
}

}  // namespace panoptic
