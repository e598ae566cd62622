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
#include "panoptic/fixtures.hpp"

#include <functional>
#include <string>
#include <utility>

namespace panoptic {

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  return doc[key];
}

std::vector<double> flatten_numbers(const json& value) {
  std::vector<double> out;
  auto walk = [&](auto&& self, const json& v) -> void {
    if (v.is_array()) {
      for (const auto& item : v) self(self, item);
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw SchemaError("expected a number, got " + v.dump());
    }
  };
  walk(walk, value);
  return out;
}

std::vector<Box> boxes_from(const json& value, const std::string& where) {
  if (!value.is_array()) throw SchemaError(where + " must be an array");
  std::vector<Box> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const json& item = value[i];
    try {
      out.push_back(box_from_json(item.is_object() ? item.at("box") : item));
    } catch (const std::exception& e) {
      throw SchemaError(where + "[" + std::to_string(i) + "]: " + e.what(), i);
    }
  }
  return out;
}

MaskGrid mask_from(const json& value, const std::string& where) {
  const auto values = flatten_numbers(value);
  try {
    return MaskGrid(values);
  } catch (const std::exception& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

GtMask gt_mask_from(const json& value, const std::string& where) {
  const auto values = flatten_numbers(value);
  std::vector<std::uint8_t> labels;
  labels.reserve(values.size());
  for (double v : values) {
    if (v == 0.0 || v == 1.0) {
      labels.push_back(static_cast<std::uint8_t>(v));
    } else if (v == -1.0 || v == 255.0) {
      labels.push_back(GtMask::kVoid);
    } else {
      throw SchemaError(where + ": mask labels are 0, 1 or -1 (void)");
    }
  }
  try {
    return GtMask(labels);
  } catch (const std::exception& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

MatchSet matches_from(const json& section, const std::string& where,
                      const std::function<MatchSet(const MatcherConfig&)>& match,
                      bool rpn) {
  if (section.contains("matches")) {
    return match_set_from_json(section["matches"]);
  }
  const MatcherConfig cfg = section.contains("config")
                                ? MatcherConfig::from_json(section["config"])
                                : MatcherConfig{};
  const auto seed = field(section, "seed", where).get<std::uint64_t>();
  const MatchSet all = match(cfg);
  return rpn ? sample_matches(all, cfg.caps.rpn_positive, cfg.caps.rpn_total,
                              SeededRng(seed))
             : sample_matches(all, cfg.caps.rsh_positive, cfg.caps.rsh_total,
                              SeededRng(seed));
}

void semantic_section(const json& doc, LossReport& report) {
  const std::string where = "semantic";
  const int height = field(doc, "height", where).get<int>();
  const int width = field(doc, "width", where).get<int>();
  const int classes = field(doc, "classes", where).get<int>();
  auto probs = SemanticProb::create(height, width, classes,
                                    flatten_numbers(field(doc, "probs", where)));
  std::vector<int> labels;
  for (double v : flatten_numbers(field(doc, "target", where))) {
    labels.push_back(static_cast<int>(v));
  }
  auto target = SemanticTarget::create(height, width, classes, std::move(labels));
  const SemanticLoss loss = loss_semantic(probs, target);
  report.l_ss = loss.value;
  if (loss.saturated) report.flags.push_back("semantic_saturated");
}

void rpn_section(const json& doc, LossReport& report) {
  const std::string where = "rpn";
  std::vector<Anchor> anchors;
  const json& anchors_doc = field(doc, "anchors", where);
  const auto anchor_boxes = boxes_from(anchors_doc, "rpn.anchors");
  for (std::size_t i = 0; i < anchor_boxes.size(); ++i) {
    const json& item = anchors_doc[i];
    const int level = item.is_object() ? item.value("level", 0) : 0;
    anchors.push_back({anchor_boxes[i], level});
  }
  const auto gt = boxes_from(field(doc, "gt", where), "rpn.gt");
  const auto scores = field(doc, "objectness", where).get<std::vector<double>>();
  const auto pred = boxes_from(field(doc, "pred_boxes", where), "rpn.pred_boxes");
  const MatchSet sampled = matches_from(
      doc, where,
      [&](const MatcherConfig& cfg) { return match_rpn(anchors, gt, cfg); },
      true);
  const RpnLoss loss = loss_rpn(scores, pred, anchors, gt, sampled);
  report.l_rpn_ob = loss.objectness;
  report.l_rpn_bb = loss.box;
  if (loss.saturated) report.flags.push_back("rpn_saturated");
  if (loss.empty_match_set) report.flags.push_back("rpn_empty_match_set");
}

void rsh_section(const json& doc, LossReport& report) {
  const std::string where = "rsh";
  RshInputs in;
  in.proposals = boxes_from(field(doc, "proposals", where), "rsh.proposals");
  const json& gt_doc = field(doc, "gt", where);
  const auto gt_boxes = boxes_from(gt_doc, "rsh.gt");
  for (std::size_t i = 0; i < gt_boxes.size(); ++i) {
    const json& item = gt_doc[i];
    if (!item.is_object()) {
      throw SchemaError("rsh.gt[" + std::to_string(i) +
                            "] must be {box, class_id}",
                        i);
    }
    in.gt.push_back({gt_boxes[i], field(item, "class_id", "rsh.gt").get<ClassId>()});
  }
  in.class_probs =
      field(doc, "class_probs", where).get<std::vector<std::vector<double>>>();
  const json& boxes_doc = field(doc, "class_boxes", where);
  if (!boxes_doc.is_array()) throw SchemaError("rsh.class_boxes must be an array");
  for (std::size_t i = 0; i < boxes_doc.size(); ++i) {
    in.class_boxes.push_back(
        boxes_from(boxes_doc[i], "rsh.class_boxes[" + std::to_string(i) + "]"));
  }
  const std::size_t n = in.proposals.size();
  in.pred_masks.resize(n);
  in.gt_masks.resize(n);
  auto read_masks = [&](const char* key, auto& out, auto parse) {
    if (!doc.contains(key)) return;
    const json& list = doc[key];
    if (!list.is_array() || list.size() != n) {
      throw SchemaError(std::string("rsh.") + key +
                        " needs one entry (or null) per proposal");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (list[i].is_null()) continue;
      out[i] = parse(list[i], std::string("rsh.") + key + "[" +
                                  std::to_string(i) + "]");
    }
  };
  read_masks("pred_masks", in.pred_masks, mask_from);
  read_masks("gt_masks", in.gt_masks, gt_mask_from);
  in.sampled = matches_from(
      doc, where,
      [&](const MatcherConfig& cfg) {
        return match_rsh(in.proposals, in.gt, cfg);
      },
      false);
  const RshLoss loss = loss_rsh(in);
  report.l_rsh_cls = loss.classification;
  report.l_rsh_bb = loss.box;
  report.l_rsh_msk = loss.mask;
  if (loss.saturated) report.flags.push_back("rsh_saturated");
  if (loss.empty_match_set) report.flags.push_back("rsh_empty_match_set");
  for (std::size_t idx : loss.all_void_masks) {
    report.flags.push_back("rsh_all_void_mask:" + std::to_string(idx));
  }
}

template <typename Fn>
void run_section(const json& bundle, const char* name, LossReport& report,
                 Fn fn) {
  if (!bundle.contains(name) || bundle[name].is_null()) {
    report.flags.push_back(std::string(name) + "_absent");
    return;
  }
  try {
    fn(bundle[name], report);
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

std::vector<Detection> detections_from_json(const json& doc) {
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("detections")) {
      throw SchemaError("detections document needs a 'detections' array");
    }
    list = &doc["detections"];
  }
  if (!list->is_array()) {
    throw SchemaError("detections must be an array");
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& record = (*list)[i];
    const std::string where = "detection " + std::to_string(i);
    try {
      Detection det;
      det.box = box_from_json(field(record, "box", where));
      det.class_id = field(record, "class_id", where).get<ClassId>();
      det.score = field(record, "score", where).get<double>();
      if (!(det.score >= 0.0 && det.score <= 1.0)) {
        throw SchemaError("score must lie in [0, 1]");
      }
      det.mask = MaskGrid(flatten_numbers(field(record, "mask", where)));
      out.push_back(std::move(det));
    } catch (const std::exception& e) {
      throw SchemaError(where + ": " + e.what(), i);
    }
  }
  return out;
}

json detections_to_json(std::span<const Detection> detections) {
  json list = json::array();
  for (const auto& det : detections) {
    list.push_back({{"box", box_to_json(det.box)},
                    {"class_id", det.class_id},
                    {"score", det.score},
                    {"mask", det.mask.values()}});
  }
  return {{"detections", std::move(list)}};
}

LossReport evaluate_loss_fixture(const json& bundle) {
  if (!bundle.is_object()) {
    throw SchemaError("loss fixture must be a JSON object");
  }
  LossReport report;
  run_section(bundle, "semantic", report, semantic_section);
  run_section(bundle, "rpn", report, rpn_section);
  run_section(bundle, "rsh", report, rsh_section);
  return report;
}

}  // namespace panoptic
