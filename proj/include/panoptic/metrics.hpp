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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "panoptic/panoptic_model.hpp"

namespace panoptic {

// Sum of IoU ratios in fixed point with 64 fractional bits. Each ratio is
// rounded once from its integer pixel counts, so addition is exact and the
// sum does not depend on accumulation order.
class IouSum {
 public:
  void add(std::uint64_t intersection, std::uint64_t union_area);
  IouSum& operator+=(const IouSum& other) {
    raw_ += other.raw_;
    return *this;
  }
  double value() const;
  bool operator==(const IouSum&) const = default;

 private:
  unsigned __int128 raw_ = 0;
};

struct ClassStats {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  IouSum tp_iou;
  // Stuff classes only.
  IouSum dagger_iou;
  std::uint64_t dagger_gt_count = 0;

  bool operator==(const ClassStats&) const = default;
};

class MetricAccumulator {
 public:
  explicit MetricAccumulator(const ClassTable& classes);

  const std::map<ClassId, ClassStats>& per_class() const { return stats_; }
  const ClassStats& stats(ClassId id) const;
  ClassStats& stats(ClassId id);
  std::uint64_t images() const { return images_; }
  void count_image() { ++images_; }

  // Fieldwise sum; throws std::invalid_argument on class-table mismatch.
  MetricAccumulator& merge_from(const MetricAccumulator& other);

  bool operator==(const MetricAccumulator&) const = default;

 private:
  std::map<ClassId, ClassKind> kinds_;
  std::map<ClassId, ClassStats> stats_;
  std::uint64_t images_ = 0;
};

MetricAccumulator merge(const MetricAccumulator& a, const MetricAccumulator& b);

struct MetricOptions {
  // Ground-truth segments more than half covered by predicted void are not
  // counted as false negatives.
  bool fn_void_rule = true;
};

// IoU with ground-truth void removed from the prediction: |g & p| /
// (|g| + |p \ V| - |g & p|). All spans are sorted pixel indices; returns 0
// when the denominator is 0.
double segment_iou(std::span<const std::uint32_t> gt_pixels,
                   std::span<const std::uint32_t> pred_pixels,
                   std::span<const std::uint32_t> gt_void_pixels);

struct SegmentPair {
  SegmentId gt = 0;
  SegmentId pred = 0;
  ClassId class_id = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;

  auto operator<=>(const SegmentPair&) const = default;
};

struct LabeledSegment {
  SegmentId id = 0;
  ClassId class_id = 0;

  auto operator<=>(const LabeledSegment&) const = default;
};

// Class-level overlap of a stuff class present in the ground truth.
struct StuffOverlap {
  ClassId class_id = 0;
  std::uint64_t gt_segments = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
};

// Full matching outcome for one image, every list sorted.
struct ImageMatches {
  std::vector<SegmentPair> true_positives;
  std::vector<LabeledSegment> false_positives;
  std::vector<LabeledSegment> false_negatives;
  std::vector<LabeledSegment> exempt_predictions;
  std::vector<LabeledSegment> exempt_ground_truth;
  std::vector<StuffOverlap> stuff_overlaps;
};

ImageMatches match_image(const PanopticMap& gt, const PanopticMap& pred,
                         const ClassTable& classes,
                         const MetricOptions& options = {});

MetricAccumulator accumulate_image(const PanopticMap& gt,
                                   const PanopticMap& pred,
                                   const ClassTable& classes,
                                   MetricAccumulator acc,
                                   const MetricOptions& options = {});

// Folds one image's matches into `acc`.
void accumulate_matches(const ImageMatches& matches, const ClassTable& classes,
                        MetricAccumulator& acc);

struct ClassReport {
  ClassKind kind = ClassKind::kStuff;
  std::optional<double> pq;
  std::optional<double> pq_dagger;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

struct MetricReport {
  std::optional<double> pq;
  std::optional<double> pq_stuff;
  std::optional<double> pq_things;
  std::optional<double> pq_dagger;
  std::map<ClassId, ClassReport> per_class;
  // Classes without any TP, FP or FN; excluded from the PQ averages.
  std::vector<ClassId> undefined_classes;
  // Classes excluded from the PQ-dagger average.
  std::vector<ClassId> undefined_dagger_classes;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

MetricReport finalize(const MetricAccumulator& acc, const ClassTable& classes);

}  // namespace panoptic
