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
#include "panoptic/panoptic_model.hpp"

#include <fstream>
#include <set>
#include <string>
#include <utility>

#include "panoptic/png_codec.hpp"

namespace panoptic {

namespace {

using Kind = DecodeError::Kind;

void check_dimensions(int width, int height, std::size_t size) {
  if (width < 0 || height < 0 ||
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) !=
          size) {
    throw DecodeError(Kind::kDimensionMismatch,
                      "pixel buffer of size " + std::to_string(size) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

std::int64_t require_int(const nlohmann::json& record, const char* key,
                         Kind kind) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_number_integer()) {
    throw DecodeError(kind, std::string("missing integer field '") + key +
                                "' in " + record.dump());
  }
  return it->get<std::int64_t>();
}

}  // namespace

void ClassTable::add(ClassId id, ClassInfo info) {
  if (id == kVoidId) {
    throw std::invalid_argument("class id 0 is reserved for void");
  }
  if (!entries_.emplace(id, std::move(info)).second) {
    throw std::invalid_argument("duplicate class id " + std::to_string(id));
  }
}

const ClassInfo& ClassTable::at(ClassId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw std::out_of_range("unknown class id " + std::to_string(id));
  }
  return it->second;
}

std::vector<ClassId> ClassTable::ids() const {
  std::vector<ClassId> out;
  out.reserve(entries_.size());
  for (const auto& [id, info] : entries_) out.push_back(id);
  return out;
}

ClassTable ClassTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("categories") ||
      !doc["categories"].is_array()) {
    throw DecodeError(Kind::kMalformedSidecar,
                      "categories document needs a 'categories' array");
  }
  ClassTable table;
  for (const auto& entry : doc["categories"]) {
    const auto id = require_int(entry, "id", Kind::kMalformedSidecar);
    const auto is_thing = require_int(entry, "isthing", Kind::kMalformedSidecar);
    if (id <= 0 || id >= static_cast<std::int64_t>(kMaxEncodableId)) {
      throw DecodeError(Kind::kIdOutOfRange,
                        "category id " + std::to_string(id) + " out of range",
                        static_cast<std::uint64_t>(id));
    }
    if (is_thing != 0 && is_thing != 1) {
      throw DecodeError(Kind::kMalformedSidecar,
                        "isthing must be 0 or 1 for category " +
                            std::to_string(id),
                        static_cast<std::uint64_t>(id));
    }
    ClassInfo info;
    info.name = entry.value("name", std::string());
    info.kind = is_thing == 1 ? ClassKind::kThing : ClassKind::kStuff;
    if (table.contains(static_cast<ClassId>(id))) {
      throw DecodeError(Kind::kMalformedSidecar,
                        "duplicate category id " + std::to_string(id),
                        static_cast<std::uint64_t>(id));
    }
    table.add(static_cast<ClassId>(id), std::move(info));
  }
  return table;
}

nlohmann::json ClassTable::to_json() const {
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& [id, info] : entries_) {
    categories.push_back({{"id", id},
                          {"name", info.name},
                          {"isthing", info.kind == ClassKind::kThing ? 1 : 0}});
  }
  return {{"categories", std::move(categories)}};
}

ClassTable load_class_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(Kind::kMalformedSidecar, path + ": " + e.what());
  }
  return ClassTable::from_json(doc);
}

PanopticMap PanopticMap::create(int width, int height,
                                std::vector<SegmentId> pixels,
                                std::map<SegmentId, ClassId> segments,
                                const ClassTable& classes) {
  check_dimensions(width, height, pixels.size());
  for (const auto& [id, class_id] : segments) {
    if (id == kVoidId) {
      throw DecodeError(Kind::kMalformedSidecar,
                        "segment id 0 is reserved for void", id);
    }
    if (!classes.contains(class_id)) {
      throw DecodeError(Kind::kUnknownCategory,
                        "segment " + std::to_string(id) +
                            " has unknown category_id " +
                            std::to_string(class_id),
                        class_id);
    }
  }
  // Segments are id-defined; scan once and check membership on id change.
  SegmentId last = kVoidId;
  for (SegmentId id : pixels) {
    if (id == kVoidId || id == last) continue;
    if (segments.find(id) == segments.end()) {
      throw DecodeError(Kind::kMissingSegment,
                        "pixel id " + std::to_string(id) +
                            " has no segments_info entry",
                        id);
    }
    last = id;
  }
  PanopticMap map;
  map.width_ = width;
  map.height_ = height;
  map.pixels_ = std::move(pixels);
  map.segments_ = std::move(segments);
  return map;
}

ClassId PanopticMap::class_of(SegmentId id) const {
  auto it = segments_.find(id);
  if (it == segments_.end()) {
    throw std::out_of_range("unknown segment id " + std::to_string(id));
  }
  return it->second;
}

SemanticMap SemanticMap::create(int width, int height,
                                std::vector<ClassId> labels,
                                const ClassTable& classes) {
  check_dimensions(width, height, labels.size());
  for (ClassId label : labels) {
    if (label != kVoidId && !classes.contains(label)) {
      throw DecodeError(Kind::kUnknownCategory,
                        "semantic label " + std::to_string(label) +
                            " is not in the class table",
                        label);
    }
  }
  SemanticMap map;
  map.width_ = width;
  map.height_ = height;
  map.labels_ = std::move(labels);
  return map;
}

PanopticMap read_panoptic(std::span<const std::uint8_t> png_bytes,
                          const nlohmann::json& sidecar,
                          const ClassTable& classes) {
  if (!sidecar.is_object() || !sidecar.contains("segments_info") ||
      !sidecar["segments_info"].is_array()) {
    throw DecodeError(Kind::kMalformedSidecar,
                      "sidecar needs a 'segments_info' array");
  }
  std::map<SegmentId, ClassId> segments;
  for (const auto& record : sidecar["segments_info"]) {
    const auto id = require_int(record, "id", Kind::kMalformedSidecar);
    const auto category =
        require_int(record, "category_id", Kind::kMalformedSidecar);
    if (id <= 0 || id >= static_cast<std::int64_t>(kMaxEncodableId)) {
      throw DecodeError(Kind::kIdOutOfRange,
                        "segment id " + std::to_string(id) + " out of range",
                        static_cast<std::uint64_t>(id));
    }
    if (record.contains("iscrowd") && record["iscrowd"].is_number() &&
        record["iscrowd"].get<double>() != 0.0) {
      throw DecodeError(Kind::kCrowdAnnotation,
                        "crowd annotations are not supported (segment " +
                            std::to_string(id) + ")",
                        static_cast<std::uint64_t>(id));
    }
    if (category <= 0 || !classes.contains(static_cast<ClassId>(category))) {
      throw DecodeError(Kind::kUnknownCategory,
                        "segment " + std::to_string(id) +
                            " has unknown category_id " +
                            std::to_string(category),
                        static_cast<std::uint64_t>(category));
    }
    if (!segments.emplace(static_cast<SegmentId>(id),
                          static_cast<ClassId>(category))
             .second) {
      throw DecodeError(Kind::kDuplicateSegment,
                        "segment id " + std::to_string(id) +
                            " listed twice in segments_info",
                        static_cast<std::uint64_t>(id));
    }
  }

  RawImage image = decode_png(png_bytes, PngLayout::kRgb);
  for (const char* key : {"width", "height"}) {
    if (sidecar.contains(key)) {
      const auto expected = require_int(sidecar, key, Kind::kMalformedSidecar);
      const int actual = key[0] == 'w' ? image.width : image.height;
      if (expected != actual) {
        throw DecodeError(Kind::kDimensionMismatch,
                          std::string("sidecar ") + key + " " +
                              std::to_string(expected) + " != PNG " + key +
                              " " + std::to_string(actual));
      }
    }
  }

  std::vector<SegmentId> pixels(static_cast<std::size_t>(image.width) *
                                image.height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::uint8_t* rgb = image.data.data() + 3 * i;
    pixels[i] = rgb_to_id(rgb[0], rgb[1], rgb[2]);
  }
  return PanopticMap::create(image.width, image.height, std::move(pixels),
                             std::move(segments), classes);
}

EncodedPanoptic write_panoptic(const PanopticMap& map) {
  for (const auto& [id, class_id] : map.segments()) {
    if (id >= kMaxEncodableId) {
      throw std::invalid_argument("segment id " + std::to_string(id) +
                                  " does not fit in 24 bits");
    }
  }
  RawImage image;
  image.width = map.width();
  image.height = map.height();
  image.channels = 3;
  image.data.resize(map.pixel_count() * 3);
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    const SegmentId id = map.pixels()[i];
    image.data[3 * i] = static_cast<std::uint8_t>(id & 0xff);
    image.data[3 * i + 1] = static_cast<std::uint8_t>((id >> 8) & 0xff);
    image.data[3 * i + 2] = static_cast<std::uint8_t>((id >> 16) & 0xff);
  }
  EncodedPanoptic out;
  out.png = encode_png(image);
  nlohmann::json infos = nlohmann::json::array();
  for (const auto& [id, class_id] : map.segments()) {
    infos.push_back({{"id", id}, {"category_id", class_id}});
  }
  out.sidecar = {{"segments_info", std::move(infos)}};
  return out;
}

SemanticMap read_semantic(std::span<const std::uint8_t> png_bytes,
                          const ClassTable& classes) {
  RawImage image = decode_png(png_bytes, PngLayout::kGray);
  std::vector<ClassId> labels(image.data.begin(), image.data.end());
  return SemanticMap::create(image.width, image.height, std::move(labels),
                             classes);
}

std::vector<std::uint8_t> write_semantic(const SemanticMap& map) {
  RawImage image;
  image.width = map.width();
  image.height = map.height();
  image.channels = 1;
  image.data.reserve(map.labels().size());
  for (ClassId label : map.labels()) {
    if (label > 255) {
      throw std::invalid_argument("class id " + std::to_string(label) +
                                  " does not fit in an 8-bit semantic PNG");
    }
    image.data.push_back(static_cast<std::uint8_t>(label));
  }
  return encode_png(image);
}

std::vector<SegmentRecord> extract_segments(const PanopticMap& map) {
  std::map<SegmentId, SegmentRecord> by_id;
  const auto& pixels = map.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const SegmentId id = pixels[i];
    if (id == kVoidId) continue;
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) {
      it->second.segment_id = id;
      it->second.class_id = map.class_of(id);
    }
    it->second.pixels.push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<SegmentRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, record] : by_id) {
    record.pixel_count = record.pixels.size();
    out.push_back(std::move(record));
  }
  return out;
}

}  // namespace panoptic
