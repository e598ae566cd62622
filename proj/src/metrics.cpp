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
#include "panoptic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace panoptic {

namespace {

constexpr double kTwoPow64 = 18446744073709551616.0;

std::uint64_t pair_key(SegmentId gt, SegmentId pred) {
  return (std::uint64_t{gt} << 32) | pred;
}

// True iff part / whole > 1/2.
bool more_than_half(std::uint64_t part, std::uint64_t whole) {
  return 2 * part > whole;
}

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

nlohmann::json optional_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

}  // namespace

void IouSum::add(std::uint64_t intersection, std::uint64_t union_area) {
  if (union_area == 0) return;
  if (intersection > union_area) {
    throw std::invalid_argument("intersection exceeds union");
  }
  const unsigned __int128 numerator =
      (static_cast<unsigned __int128>(intersection) << 64) + union_area / 2;
  raw_ += numerator / union_area;
}

double IouSum::value() const { return static_cast<double>(raw_) / kTwoPow64; }

MetricAccumulator::MetricAccumulator(const ClassTable& classes) {
  for (const auto& [id, info] : classes.entries()) {
    kinds_.emplace(id, info.kind);
    stats_.emplace(id, ClassStats{});
  }
}

const ClassStats& MetricAccumulator::stats(ClassId id) const {
  auto it = stats_.find(id);
  if (it == stats_.end()) {
    throw std::out_of_range("class " + std::to_string(id) +
                            " is not tracked by this accumulator");
  }
  return it->second;
}

ClassStats& MetricAccumulator::stats(ClassId id) {
  auto it = stats_.find(id);
  if (it == stats_.end()) {
    throw std::out_of_range("class " + std::to_string(id) +
                            " is not tracked by this accumulator");
  }
  return it->second;
}

MetricAccumulator& MetricAccumulator::merge_from(
    const MetricAccumulator& other) {
  if (kinds_ != other.kinds_) {
    throw std::invalid_argument(
        "cannot merge accumulators built for different class tables");
  }
  for (auto& [id, s] : stats_) {
    const ClassStats& o = other.stats_.at(id);
    s.tp += o.tp;
    s.fp += o.fp;
    s.fn += o.fn;
    s.tp_iou += o.tp_iou;
    s.dagger_iou += o.dagger_iou;
    s.dagger_gt_count += o.dagger_gt_count;
  }
  images_ += other.images_;
  return *this;
}

MetricAccumulator merge(const MetricAccumulator& a,
                        const MetricAccumulator& b) {
  MetricAccumulator out = a;
  out.merge_from(b);
  return out;
}

double segment_iou(std::span<const std::uint32_t> gt_pixels,
                   std::span<const std::uint32_t> pred_pixels,
                   std::span<const std::uint32_t> gt_void_pixels) {
  std::vector<std::uint32_t> common;
  std::set_intersection(gt_pixels.begin(), gt_pixels.end(),
                        pred_pixels.begin(), pred_pixels.end(),
                        std::back_inserter(common));
  std::vector<std::uint32_t> pred_on_void;
  std::set_intersection(pred_pixels.begin(), pred_pixels.end(),
                        gt_void_pixels.begin(), gt_void_pixels.end(),
                        std::back_inserter(pred_on_void));
  const std::size_t union_area = gt_pixels.size() + pred_pixels.size() -
                                 pred_on_void.size() - common.size();
  if (union_area == 0) return 0.0;
  return static_cast<double>(common.size()) / static_cast<double>(union_area);
}

ImageMatches match_image(const PanopticMap& gt, const PanopticMap& pred,
                         const ClassTable& classes,
                         const MetricOptions& options) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw DecodeError(DecodeError::Kind::kDimensionMismatch,
                      "ground truth is " + std::to_string(gt.width()) + "x" +
                          std::to_string(gt.height()) + ", prediction is " +
                          std::to_string(pred.width()) + "x" +
                          std::to_string(pred.height()));
  }

  // Co-occurrence counts of (gt id, pred id), with runs collapsed.
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  const auto& g = gt.pixels();
  const auto& p = pred.pixels();
  std::size_t i = 0;
  while (i < g.size()) {
    std::size_t j = i + 1;
    while (j < g.size() && g[j] == g[i] && p[j] == p[i]) ++j;
    counts[pair_key(g[i], p[i])] += j - i;
    i = j;
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cooc(counts.begin(),
                                                            counts.end());
  std::sort(cooc.begin(), cooc.end());

  std::map<SegmentId, std::uint64_t> gt_area, gt_on_pred_void;
  std::map<SegmentId, std::uint64_t> pred_area, pred_on_gt_void;
  for (const auto& [key, n] : cooc) {
    const auto gid = static_cast<SegmentId>(key >> 32);
    const auto pid = static_cast<SegmentId>(key & 0xffffffffu);
    if (gid != kVoidId) {
      gt_area[gid] += n;
      if (pid == kVoidId) gt_on_pred_void[gid] += n;
    }
    if (pid != kVoidId) {
      pred_area[pid] += n;
      if (gid == kVoidId) pred_on_gt_void[pid] += n;
    }
  }
  auto lookup = [](const std::map<SegmentId, std::uint64_t>& m, SegmentId id) {
    auto it = m.find(id);
    return it == m.end() ? std::uint64_t{0} : it->second;
  };

  ImageMatches out;
  std::map<SegmentId, bool> gt_matched, pred_matched;
  std::map<ClassId, StuffOverlap> stuff;
  for (const auto& [id, area] : gt_area) {
    const ClassId c = gt.class_of(id);
    gt_matched[id] = false;
    if (classes.is_stuff(c)) {
      auto& s = stuff[c];
      s.class_id = c;
      ++s.gt_segments;
      s.union_area += area;
    }
  }
  for (const auto& [id, area] : pred_area) {
    const ClassId c = pred.class_of(id);
    pred_matched[id] = false;
    auto it = stuff.find(c);
    if (it != stuff.end()) {
      it->second.union_area += area - lookup(pred_on_gt_void, id);
    }
  }

  for (const auto& [key, inter] : cooc) {
    const auto gid = static_cast<SegmentId>(key >> 32);
    const auto pid = static_cast<SegmentId>(key & 0xffffffffu);
    if (gid == kVoidId || pid == kVoidId) continue;
    const ClassId c = gt.class_of(gid);
    if (pred.class_of(pid) != c) continue;
    const std::uint64_t union_area = gt_area[gid] + pred_area[pid] -
                                     lookup(pred_on_gt_void, pid) - inter;
    if (classes.is_stuff(c)) {
      auto& s = stuff[c];
      s.intersection += inter;
      s.union_area -= inter;
    }
    if (more_than_half(inter, union_area)) {
      out.true_positives.push_back({gid, pid, c, inter, union_area});
      gt_matched[gid] = true;
      pred_matched[pid] = true;
    }
  }

  for (const auto& [id, matched] : gt_matched) {
    if (matched) continue;
    const LabeledSegment seg{id, gt.class_of(id)};
    if (options.fn_void_rule &&
        more_than_half(lookup(gt_on_pred_void, id), gt_area[id])) {
      out.exempt_ground_truth.push_back(seg);
    } else {
      out.false_negatives.push_back(seg);
    }
  }
  for (const auto& [id, matched] : pred_matched) {
    if (matched) continue;
    const LabeledSegment seg{id, pred.class_of(id)};
    if (more_than_half(lookup(pred_on_gt_void, id), pred_area[id])) {
      out.exempt_predictions.push_back(seg);
    } else {
      out.false_positives.push_back(seg);
    }
  }
  for (const auto& [c, s] : stuff) out.stuff_overlaps.push_back(s);
  std::sort(out.true_positives.begin(), out.true_positives.end());
  return out;
}

void accumulate_matches(const ImageMatches& matches, const ClassTable& classes,
                        MetricAccumulator& acc) {
  for (const auto& tp : matches.true_positives) {
    auto& s = acc.stats(tp.class_id);
    ++s.tp;
    s.tp_iou.add(tp.intersection, tp.union_area);
  }
  for (const auto& seg : matches.false_positives) ++acc.stats(seg.class_id).fp;
  for (const auto& seg : matches.false_negatives) ++acc.stats(seg.class_id).fn;
  for (const auto& overlap : matches.stuff_overlaps) {
    if (!classes.is_stuff(overlap.class_id)) continue;
    auto& s = acc.stats(overlap.class_id);
    ++s.dagger_gt_count;
    if (overlap.intersection > 0) {
      s.dagger_iou.add(overlap.intersection, overlap.union_area);
    }
  }
  acc.count_image();
}

MetricAccumulator accumulate_image(const PanopticMap& gt,
                                   const PanopticMap& pred,
                                   const ClassTable& classes,
                                   MetricAccumulator acc,
                                   const MetricOptions& options) {
  accumulate_matches(match_image(gt, pred, classes, options), classes, acc);
  return acc;
}

MetricReport finalize(const MetricAccumulator& acc, const ClassTable& classes) {
  MetricReport report;
  std::vector<double> all_pq, stuff_pq, thing_pq, all_dagger;
  for (const auto& [id, info] : classes.entries()) {
    const ClassStats& s = acc.stats(id);
    ClassReport cr;
    cr.kind = info.kind;
    cr.tp = s.tp;
    cr.fp = s.fp;
    cr.fn = s.fn;
    if (s.tp + s.fp + s.fn > 0) {
      const double denom = static_cast<double>(s.tp) +
                           0.5 * static_cast<double>(s.fp) +
                           0.5 * static_cast<double>(s.fn);
      cr.pq = s.tp_iou.value() / denom;
    }
    if (info.kind == ClassKind::kThing) {
      cr.pq_dagger = cr.pq;
    } else if (s.dagger_gt_count > 0) {
      cr.pq_dagger =
          s.dagger_iou.value() / static_cast<double>(s.dagger_gt_count);
    }
    if (cr.pq) {
      all_pq.push_back(*cr.pq);
      (info.kind == ClassKind::kThing ? thing_pq : stuff_pq).push_back(*cr.pq);
    } else {
      report.undefined_classes.push_back(id);
    }
    if (cr.pq_dagger) {
      all_dagger.push_back(*cr.pq_dagger);
    } else {
      report.undefined_dagger_classes.push_back(id);
    }
    report.per_class.emplace(id, cr);
  }
  report.pq = mean_of(all_pq);
  report.pq_stuff = mean_of(stuff_pq);
  report.pq_things = mean_of(thing_pq);
  report.pq_dagger = mean_of(all_dagger);
  return report;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json classes_doc = nlohmann::json::object();
  for (const auto& [id, cr] : per_class) {
    classes_doc[std::to_string(id)] = {
        {"kind", cr.kind == ClassKind::kThing ? "thing" : "stuff"},
        {"pq_c", optional_json(cr.pq)},
        {"pq_dagger_c", optional_json(cr.pq_dagger)},
        {"tp", cr.tp},
        {"fp", cr.fp},
        {"fn", cr.fn}};
  }
  return {{"pq", optional_json(pq)},
          {"pq_dagger", optional_json(pq_dagger)},
          {"pq_stuff", optional_json(pq_stuff)},
          {"pq_things", optional_json(pq_things)},
          {"per_class", std::move(classes_doc)},
          {"undefined_classes", undefined_classes},
          {"undefined_dagger_classes", undefined_dagger_classes}};
}

std::string MetricReport::to_text() const {
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("undefined");
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << 100.0 * *v;
    return os.str();
  };
  std::ostringstream os;
  os << "PQ      " << fmt(pq) << "\n"
     << "PQ_St   " << fmt(pq_stuff) << "\n"
     << "PQ_Th   " << fmt(pq_things) << "\n"
     << "PQ-dag  " << fmt(pq_dagger) << "\n";
  os << "class  kind   PQ_c      PQ-dag_c  TP  FP  FN\n";
  for (const auto& [id, cr] : per_class) {
    os << id << "  " << (cr.kind == ClassKind::kThing ? "thing" : "stuff")
       << "  " << fmt(cr.pq) << "  " << fmt(cr.pq_dagger) << "  " << cr.tp
       << "  " << cr.fp << "  " << cr.fn << "\n";
  }
  return os.str();
}

}  // namespace panoptic
