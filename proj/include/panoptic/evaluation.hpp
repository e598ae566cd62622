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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panoptic/metrics.hpp"
#include "panoptic/panoptic_model.hpp"

namespace panoptic {

// Runs `task(i)` for i in [0, count) on `jobs` worker threads and merges the
// per-item accumulators in index order, so the result is identical for any
// worker count. The exception of the lowest failing index is rethrown.
MetricAccumulator parallel_accumulate(
    std::size_t count, int jobs, const ClassTable& classes,
    const std::function<MetricAccumulator(std::size_t)>& task);

using MapPair = std::pair<PanopticMap, PanopticMap>;

MetricAccumulator evaluate_maps(std::span<const MapPair> pairs,
                                const ClassTable& classes,
                                const MetricOptions& options = {},
                                int jobs = 1);

// One ground-truth / prediction image pair on disk.
struct DatasetPair {
  std::string stem;
  std::string gt_png;
  std::string pred_png;
  nlohmann::json gt_sidecar;
  nlohmann::json pred_sidecar;
};

struct DatasetListing {
  std::vector<DatasetPair> pairs;
  // Stems present on one side only, or without a sidecar.
  std::vector<std::string> unmatched;
};

// Pairs `<stem>.png` files across the two directories. Sidecars come from
// `<stem>.json` next to each PNG, or from a combined COCO panoptic
// annotation file ({"annotations":[{"file_name", "segments_info"}]}) when
// one is given for that side.
DatasetListing list_dataset(const std::string& gt_dir,
                            const std::string& pred_dir,
                            const std::optional<std::string>& gt_annotations,
                            const std::optional<std::string>& pred_annotations);

MetricAccumulator evaluate_dataset(
    std::span<const DatasetPair> pairs, const ClassTable& classes,
    const MetricOptions& options, int jobs,
    const std::function<void(std::size_t)>& on_image_done = {});

nlohmann::json read_json_file(const std::string& path);

}  // namespace panoptic
