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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace panoptic {

using ClassId = std::uint32_t;
using SegmentId = std::uint32_t;

inline constexpr SegmentId kVoidId = 0;
// Largest id representable in an 8-bit RGB pixel, exclusive.
inline constexpr std::uint32_t kMaxEncodableId = 1u << 24;

enum class ClassKind { kStuff, kThing };

struct ClassInfo {
  std::string name;
  ClassKind kind = ClassKind::kStuff;

  bool operator==(const ClassInfo&) const = default;
};

// Raised when an annotation (PNG, sidecar, categories) cannot be decoded
// into a valid panoptic structure.
class DecodeError : public std::runtime_error {
 public:
  enum class Kind {
    kMalformedImage,
    kMalformedSidecar,
    kMissingSegment,
    kUnknownCategory,
    kDuplicateSegment,
    kDimensionMismatch,
    kCrowdAnnotation,
    kIdOutOfRange,
  };

  DecodeError(Kind kind, const std::string& what, std::uint64_t id = 0)
      : std::runtime_error(what), kind_(kind), id_(id) {}

  Kind kind() const { return kind_; }
  // Offending segment or category id when the error names one.
  std::uint64_t offending_id() const { return id_; }

 private:
  Kind kind_;
  std::uint64_t id_;
};

// Set of evaluated classes. Id 0 is reserved for void.
class ClassTable {
 public:
  ClassTable() = default;

  void add(ClassId id, ClassInfo info);

  bool contains(ClassId id) const { return entries_.count(id) != 0; }
  const ClassInfo& at(ClassId id) const;
  bool is_thing(ClassId id) const { return at(id).kind == ClassKind::kThing; }
  bool is_stuff(ClassId id) const { return at(id).kind == ClassKind::kStuff; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<ClassId, ClassInfo>& entries() const { return entries_; }
  std::vector<ClassId> ids() const;

  // {"categories":[{"id":int,"name":str,"isthing":0|1}]}
  static ClassTable from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  bool operator==(const ClassTable&) const = default;

 private:
  std::map<ClassId, ClassInfo> entries_;
};

ClassTable load_class_table(const std::string& path);

// Per-pixel segment ids plus the segment -> class table. Immutable once
// built; construction validates every invariant against a ClassTable.
class PanopticMap {
 public:
  PanopticMap() = default;

  static PanopticMap create(int width, int height,
                            std::vector<SegmentId> pixels,
                            std::map<SegmentId, ClassId> segments,
                            const ClassTable& classes);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return pixels_.size(); }
  const std::vector<SegmentId>& pixels() const { return pixels_; }
  SegmentId at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::map<SegmentId, ClassId>& segments() const { return segments_; }
  ClassId class_of(SegmentId id) const;

  bool operator==(const PanopticMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<SegmentId> pixels_;
  std::map<SegmentId, ClassId> segments_;
};

// Per-pixel class labels, 0 = void.
class SemanticMap {
 public:
  SemanticMap() = default;

  static SemanticMap create(int width, int height, std::vector<ClassId> labels,
                            const ClassTable& classes);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<ClassId>& labels() const { return labels_; }
  ClassId at(int x, int y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool operator==(const SemanticMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<ClassId> labels_;
};

struct EncodedPanoptic {
  std::vector<std::uint8_t> png;
  nlohmann::json sidecar;
};

// COCO panoptic convention: id = R + 256 G + 65536 B, plus a sidecar
// {"segments_info":[{"id":int,"category_id":int}]}.
PanopticMap read_panoptic(std::span<const std::uint8_t> png_bytes,
                          const nlohmann::json& sidecar,
                          const ClassTable& classes);
EncodedPanoptic write_panoptic(const PanopticMap& map);

// The semantic PNG is 8-bit single channel with the class id per pixel.
SemanticMap read_semantic(std::span<const std::uint8_t> png_bytes,
                          const ClassTable& classes);
std::vector<std::uint8_t> write_semantic(const SemanticMap& map);

inline constexpr std::uint32_t rgb_to_id(std::uint8_t r, std::uint8_t g,
                                         std::uint8_t b) {
  return std::uint32_t{r} + 256u * g + 65536u * b;
}

struct SegmentRecord {
  SegmentId segment_id = 0;
  ClassId class_id = 0;
  std::size_t pixel_count = 0;
  // Row-major pixel indices, ascending.
  std::vector<std::uint32_t> pixels;
};

// One record per distinct nonzero id, ordered by id.
std::vector<SegmentRecord> extract_segments(const PanopticMap& map);

}  // namespace panoptic
