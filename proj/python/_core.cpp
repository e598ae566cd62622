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
// Thin extension module: converts arrays and JSON text to core types and
// back. All computation happens in the core library with the GIL released.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "panoptic/evaluation.hpp"
#include "panoptic/fixtures.hpp"
#include "panoptic/fusion.hpp"
#include "panoptic/metrics.hpp"
#include "panoptic/panoptic_model.hpp"

namespace py = pybind11;
using namespace panoptic;

namespace {

using IdArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using SegmentTable = std::map<SegmentId, ClassId>;

std::vector<std::uint32_t> grid_values(const IdArray& array, const char* what,
                                       int& width, int& height) {
  if (array.ndim() != 2) {
    throw py::value_error(std::string(what) + " must be a 2-D array");
  }
  height = static_cast<int>(array.shape(0));
  width = static_cast<int>(array.shape(1));
  std::vector<std::uint32_t> out(static_cast<std::size_t>(array.size()));
  const std::int64_t* data = array.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (data[i] < 0 || data[i] > 0xffffffffLL) {
      throw py::value_error(std::string(what) + " holds an id outside [0, 2^32)");
    }
    out[i] = static_cast<std::uint32_t>(data[i]);
  }
  return out;
}

PanopticMap to_map(const IdArray& ids, const SegmentTable& segments,
                   const ClassTable& classes, const char* what) {
  int w = 0, h = 0;
  auto values = grid_values(ids, what, w, h);
  return PanopticMap::create(w, h, std::move(values), segments, classes);
}

std::string evaluate(const std::vector<IdArray>& gt_ids,
                     const std::vector<SegmentTable>& gt_classes,
                     const std::vector<IdArray>& pred_ids,
                     const std::vector<SegmentTable>& pred_classes,
                     const std::string& categories_json, bool fn_void_rule,
                     int jobs) {
  if (gt_ids.size() != pred_ids.size() || gt_ids.size() != gt_classes.size() ||
      pred_ids.size() != pred_classes.size()) {
    throw py::value_error("ground truth and prediction lists differ in length");
  }
  const ClassTable classes = ClassTable::from_json(nlohmann::json::parse(categories_json));
  std::vector<MapPair> pairs;
  for (std::size_t i = 0; i < gt_ids.size(); ++i) {
    pairs.emplace_back(to_map(gt_ids[i], gt_classes[i], classes, "gt_ids"),
                       to_map(pred_ids[i], pred_classes[i], classes, "pred_ids"));
  }
  py::gil_scoped_release release;
  MetricOptions options;
  options.fn_void_rule = fn_void_rule;
  const MetricAccumulator acc = evaluate_maps(pairs, classes, options, jobs);
  return finalize(acc, classes).to_json().dump();
}

py::tuple fuse_arrays(const std::string& detections_json, const IdArray& semantic,
                      const std::string& categories_json, double coverage_threshold,
                      std::size_t stuff_min_area, double mask_threshold) {
  const ClassTable classes = ClassTable::from_json(nlohmann::json::parse(categories_json));
  const auto detections = detections_from_json(nlohmann::json::parse(detections_json));
  int w = 0, h = 0;
  auto labels = grid_values(semantic, "semantic", w, h);
  const SemanticMap sem = SemanticMap::create(w, h, std::move(labels), classes);
  FusionConfig cfg;
  cfg.coverage_threshold = coverage_threshold;
  cfg.stuff_min_area = stuff_min_area;
  cfg.mask_threshold = mask_threshold;

  FusionResult result;
  {
    py::gil_scoped_release release;
    result = fuse(detections, sem, classes, cfg);
  }
  py::array_t<std::uint32_t> grid({h, w});
  std::copy(result.panoptic.pixels().begin(), result.panoptic.pixels().end(),
            grid.mutable_data());
  return py::make_tuple(grid, result.panoptic.segments(), result.accepted,
                        result.empty_masks);
}

std::string losses(const std::string& fixture_json) {
  const nlohmann::json fixture = nlohmann::json::parse(fixture_json);
  py::gil_scoped_release release;
  return evaluate_loss_fixture(fixture).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the panoptic package";
  m.attr("__version__") = PANOPTIC_VERSION;

  py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
  // Translators must be captureless, so the type object lives in a static.
  static py::handle schema_error =
      py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  // Malformed JSON text surfaces as a schema problem as well.
  py::register_local_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      py::set_error(schema_error, e.what());
    }
  });

  m.def("evaluate", &evaluate, py::arg("gt_ids"), py::arg("gt_classes"),
        py::arg("pred_ids"), py::arg("pred_classes"), py::arg("categories_json"),
        py::arg("fn_void_rule") = true, py::arg("jobs") = 1);
  m.def("fuse", &fuse_arrays, py::arg("detections_json"), py::arg("semantic"),
        py::arg("categories_json"), py::arg("coverage_threshold") = 0.5,
        py::arg("stuff_min_area") = 4096, py::arg("mask_threshold") = 0.5);
  m.def("losses", &losses, py::arg("fixture_json"));
}
