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
#include "panoptic/matching.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace panoptic {

void MatcherConfig::validate() const {
  if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0)) {
    throw std::invalid_argument("matcher needs 0 <= tau_low < tau_high <= 1");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("matcher needs 0 < eta <= 1");
  }
  if (caps.rpn_positive == 0 || caps.rpn_total == 0 ||
      caps.rsh_positive == 0 || caps.rsh_total == 0) {
    throw std::invalid_argument("sampling caps must be positive");
  }
}

MatcherConfig MatcherConfig::from_json(const nlohmann::json& doc) {
  MatcherConfig cfg;
  cfg.tau_high = doc.value("tau_high", cfg.tau_high);
  cfg.tau_low = doc.value("tau_low", cfg.tau_low);
  cfg.eta = doc.value("eta", cfg.eta);
  if (doc.contains("caps")) {
    const auto& caps = doc["caps"];
    cfg.caps.rpn_positive = caps.value("rpn_pos", cfg.caps.rpn_positive);
    cfg.caps.rpn_total = caps.value("rpn_total", cfg.caps.rpn_total);
    cfg.caps.rsh_positive = caps.value("rsh_pos", cfg.caps.rsh_positive);
    cfg.caps.rsh_total = caps.value("rsh_total", cfg.caps.rsh_total);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json MatcherConfig::to_json() const {
  return {{"tau_high", tau_high},
          {"tau_low", tau_low},
          {"eta", eta},
          {"caps",
           {{"rpn_pos", caps.rpn_positive},
            {"rpn_total", caps.rpn_total},
            {"rsh_pos", caps.rsh_positive},
            {"rsh_total", caps.rsh_total}}}};
}

namespace {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Partial Fisher-Yates over [0, n), returning `k` distinct picks sorted.
std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k,
                                        const SeededRng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(i, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::uint64_t SeededRng::draw(std::uint64_t index) const {
  return mix64(mix64(seed_ + kGolden) + (index + 1) * kGolden);
}

std::uint64_t SeededRng::uniform_below(std::uint64_t index,
                                       std::uint64_t bound) const {
  if (bound == 0) {
    throw std::invalid_argument("uniform_below needs a positive bound");
  }
  // Multiply-shift range reduction.
  const unsigned __int128 product =
      static_cast<unsigned __int128>(draw(index)) * bound;
  return static_cast<std::uint64_t>(product >> 64);
}

SeededRng SeededRng::split(std::uint64_t stream) const {
  return SeededRng(mix64(seed_ ^ mix64(stream + 0x5851f42d4c957f2dULL)));
}

MatchSet match_rpn(std::span<const Anchor> anchors, std::span<const Box> gt,
                   const MatcherConfig& cfg) {
  cfg.validate();
  if (anchors.empty()) {
    throw std::invalid_argument("match_rpn needs at least one anchor");
  }
  MatchSet out;
  if (gt.empty()) {
    out.negatives.resize(anchors.size());
    std::iota(out.negatives.begin(), out.negatives.end(), std::size_t{0});
    return out;
  }

  std::vector<double> best_iou(anchors.size(), -1.0);
  std::vector<std::size_t> best_gt(anchors.size(), 0);
  std::vector<double> gt_best_iou(gt.size(), -1.0);
  std::vector<std::size_t> gt_best_anchor(gt.size(), 0);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = iou_box(anchors[a].box, gt[g]);
      if (iou > best_iou[a]) {
        best_iou[a] = iou;
        best_gt[a] = g;
      }
      if (iou > gt_best_iou[g]) {
        gt_best_iou[g] = iou;
        gt_best_anchor[g] = a;
      }
    }
  }

  std::set<MatchPair> positives;
  std::vector<bool> forced(anchors.size(), false);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    positives.insert({g, gt_best_anchor[g]});
    forced[gt_best_anchor[g]] = true;
  }
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    if (best_iou[a] > cfg.tau_high) {
      positives.insert({best_gt[a], a});
    } else if (forced[a]) {
      continue;
    } else if (best_iou[a] < cfg.tau_low) {
      out.negatives.push_back(a);
    } else {
      out.ignored.push_back(a);
    }
  }
  out.positives.assign(positives.begin(), positives.end());
  std::sort(out.positives.begin(), out.positives.end(),
            [](const MatchPair& x, const MatchPair& y) {
              return std::tie(x.pred, x.gt) < std::tie(y.pred, y.gt);
            });
  return out;
}

MatchSet match_rsh(std::span<const Box> proposals,
                   std::span<const LabeledBox> gt, const MatcherConfig& cfg) {
  cfg.validate();
  MatchSet out;
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = iou_box(proposals[p], gt[g].box);
      if (iou > best) {
        best = iou;
        best_index = g;
      }
    }
    if (!gt.empty() && best > cfg.eta) {
      out.positives.push_back({best_index, p});
    } else {
      out.negatives.push_back(p);
    }
  }
  return out;
}

MatchSet sample_matches(const MatchSet& matches, std::size_t positive_cap,
                        std::size_t total_cap, const SeededRng& rng) {
  if (positive_cap == 0 || total_cap == 0) {
    throw std::invalid_argument("sampling caps must be positive");
  }
  MatchSet out;
  const auto pos_picks = choose_indices(matches.positives.size(),
                                        positive_cap, rng.split(0));
  for (std::size_t i : pos_picks) out.positives.push_back(matches.positives[i]);

  const std::size_t negative_cap =
      total_cap > out.positives.size() ? total_cap - out.positives.size() : 0;
  const auto neg_picks = choose_indices(matches.negatives.size(),
                                        negative_cap, rng.split(1));
  for (std::size_t i : neg_picks) out.negatives.push_back(matches.negatives[i]);
  out.ignored = matches.ignored;
  return out;
}

nlohmann::json match_set_to_json(const MatchSet& matches) {
  nlohmann::json positives = nlohmann::json::array();
  for (const auto& pair : matches.positives) {
    positives.push_back({pair.gt, pair.pred});
  }
  return {{"positives", positives},
          {"negatives", matches.negatives},
          {"ignored", matches.ignored}};
}

MatchSet match_set_from_json(const nlohmann::json& doc) {
  MatchSet out;
  for (const auto& pair : doc.at("positives")) {
    if (!pair.is_array() || pair.size() != 2) {
      throw std::invalid_argument("positive match must be [gt, pred], got " +
                                  pair.dump());
    }
    out.positives.push_back(
        {pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
  }
  out.negatives = doc.value("negatives", std::vector<std::size_t>{});
  out.ignored = doc.value("ignored", std::vector<std::size_t>{});
  return out;
}

}  // namespace panoptic
