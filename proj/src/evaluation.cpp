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
#include "panoptic/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "panoptic/png_codec.hpp"

namespace panoptic {

namespace fs = std::filesystem;

MetricAccumulator parallel_accumulate(
    std::size_t count, int jobs, const ClassTable& classes,
    const std::function<MetricAccumulator(std::size_t)>& task) {
  if (jobs < 1) {
    throw std::invalid_argument("worker count must be at least 1");
  }
  std::vector<std::optional<MetricAccumulator>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i].emplace(task(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  MetricAccumulator total(classes);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    total.merge_from(*results[i]);
  }
  return total;
}

MetricAccumulator evaluate_maps(std::span<const MapPair> pairs,
                                const ClassTable& classes,
                                const MetricOptions& options, int jobs) {
  return parallel_accumulate(pairs.size(), jobs, classes, [&](std::size_t i) {
    return accumulate_image(pairs[i].first, pairs[i].second, classes,
                            MetricAccumulator(classes), options);
  });
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(DecodeError::Kind::kMalformedSidecar,
                      path + ": " + e.what());
  }
}

namespace {

std::set<std::string> png_stems(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir + " is not a directory");
  }
  std::set<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      stems.insert(entry.path().stem().string());
    }
  }
  return stems;
}

std::map<std::string, nlohmann::json> combined_sidecars(
    const std::string& path) {
  const nlohmann::json doc = read_json_file(path);
  if (!doc.contains("annotations") || !doc["annotations"].is_array()) {
    throw DecodeError(DecodeError::Kind::kMalformedSidecar,
                      path + ": expected an 'annotations' array");
  }
  std::map<std::string, nlohmann::json> out;
  for (const auto& ann : doc["annotations"]) {
    if (!ann.contains("file_name") || !ann["file_name"].is_string()) {
      throw DecodeError(DecodeError::Kind::kMalformedSidecar,
                        path + ": annotation without file_name");
    }
    const std::string stem =
        fs::path(ann["file_name"].get<std::string>()).stem().string();
    out[stem] = ann;
  }
  return out;
}

std::optional<nlohmann::json> sidecar_for(
    const std::string& dir, const std::string& stem,
    const std::optional<std::map<std::string, nlohmann::json>>& combined) {
  if (combined) {
    auto it = combined->find(stem);
    if (it == combined->end()) return std::nullopt;
    return it->second;
  }
  const fs::path path = fs::path(dir) / (stem + ".json");
  if (!fs::exists(path)) return std::nullopt;
  return read_json_file(path.string());
}

}  // namespace

DatasetListing list_dataset(const std::string& gt_dir,
                            const std::string& pred_dir,
                            const std::optional<std::string>& gt_annotations,
                            const std::optional<std::string>& pred_annotations) {
  const auto gt_stems = png_stems(gt_dir);
  const auto pred_stems = png_stems(pred_dir);
  std::optional<std::map<std::string, nlohmann::json>> gt_combined;
  std::optional<std::map<std::string, nlohmann::json>> pred_combined;
  if (gt_annotations) gt_combined = combined_sidecars(*gt_annotations);
  if (pred_annotations) pred_combined = combined_sidecars(*pred_annotations);

  DatasetListing listing;
  std::set<std::string> all(gt_stems);
  all.insert(pred_stems.begin(), pred_stems.end());
  for (const auto& stem : all) {
    if (!gt_stems.count(stem) || !pred_stems.count(stem)) {
      listing.unmatched.push_back(stem);
      continue;
    }
    auto gt_sidecar = sidecar_for(gt_dir, stem, gt_combined);
    auto pred_sidecar = sidecar_for(pred_dir, stem, pred_combined);
    if (!gt_sidecar || !pred_sidecar) {
      listing.unmatched.push_back(stem);
      continue;
    }
    listing.pairs.push_back({stem, (fs::path(gt_dir) / (stem + ".png")).string(),
                             (fs::path(pred_dir) / (stem + ".png")).string(),
                             std::move(*gt_sidecar), std::move(*pred_sidecar)});
  }
  return listing;
}

MetricAccumulator evaluate_dataset(
    std::span<const DatasetPair> pairs, const ClassTable& classes,
    const MetricOptions& options, int jobs,
    const std::function<void(std::size_t)>& on_image_done) {
  std::mutex progress_mutex;
  return parallel_accumulate(pairs.size(), jobs, classes, [&](std::size_t i) {
    const DatasetPair& pair = pairs[i];
    MetricAccumulator acc(classes);
    try {
      const PanopticMap gt = read_panoptic(read_file_bytes(pair.gt_png),
                                           pair.gt_sidecar, classes);
      const PanopticMap pred = read_panoptic(read_file_bytes(pair.pred_png),
                                             pair.pred_sidecar, classes);
      acc = accumulate_image(gt, pred, classes, std::move(acc), options);
    } catch (const DecodeError& e) {
      throw DecodeError(e.kind(), pair.stem + ": " + e.what(),
                        e.offending_id());
    }
    if (on_image_done) {
      std::lock_guard lock(progress_mutex);
      on_image_done(i);
    }
    return acc;
  });
}

}  // namespace panoptic
