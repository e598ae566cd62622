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
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panoptic/box_geometry.hpp"
#include "panoptic/panoptic_model.hpp"

namespace panoptic {

struct MatchPair {
  std::size_t gt = 0;
  std::size_t pred = 0;

  auto operator<=>(const MatchPair&) const = default;
};

// Positive (gt, pred) pairs plus negative and ignored predictions. A
// prediction index belongs to at most one of the three lists.
struct MatchSet {
  std::vector<MatchPair> positives;
  std::vector<std::size_t> negatives;
  std::vector<std::size_t> ignored;

  std::size_t size() const { return positives.size() + negatives.size(); }
  bool operator==(const MatchSet&) const = default;
};

struct SamplingCaps {
  std::size_t rpn_positive = 128;
  std::size_t rpn_total = 256;
  std::size_t rsh_positive = 128;
  std::size_t rsh_total = 512;
};

struct MatcherConfig {
  double tau_high = 0.7;
  double tau_low = 0.3;
  double eta = 0.5;
  SamplingCaps caps;

  // Throws std::invalid_argument when thresholds are out of order or range.
  void validate() const;

  static MatcherConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// Counter-based generator: the value of draw i depends only on (seed, i),
// so sample sequences are reproducible across runs and platforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw(std::uint64_t index) const;
  // Uniform integer in [0, bound) for draw `index`; bound > 0.
  std::uint64_t uniform_below(std::uint64_t index, std::uint64_t bound) const;
  // Independent stream derived from this one.
  SeededRng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
};

struct LabeledBox {
  Box box;
  ClassId class_id = 0;
};

// Anchor-side assignment: each GT's best anchor is forced positive; other
// anchors are positive above tau_high, negative below tau_low, ignored in
// between.
MatchSet match_rpn(std::span<const Anchor> anchors, std::span<const Box> gt,
                   const MatcherConfig& cfg);

// Proposal-side assignment: positive iff the best GT IoU exceeds eta.
MatchSet match_rsh(std::span<const Box> proposals,
                   std::span<const LabeledBox> gt, const MatcherConfig& cfg);

// Uniform sampling without replacement. Selected entries keep their input
// order; ignored entries pass through unchanged.
MatchSet sample_matches(const MatchSet& matches, std::size_t positive_cap,
                        std::size_t total_cap, const SeededRng& rng);

nlohmann::json match_set_to_json(const MatchSet& matches);
MatchSet match_set_from_json(const nlohmann::json& doc);

}  // namespace panoptic
