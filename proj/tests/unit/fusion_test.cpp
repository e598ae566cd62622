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
#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "panoptic/fusion.hpp"

namespace panoptic {
namespace {

constexpr ClassId kRoad = 1;
constexpr ClassId kSky = 2;
constexpr ClassId kCar = 5;
constexpr ClassId kPerson = 6;

ClassTable classes() {
  ClassTable t;
  t.add(kRoad, {"road", ClassKind::kStuff});
  t.add(kSky, {"sky", ClassKind::kStuff});
  t.add(kCar, {"car", ClassKind::kThing});
  t.add(kPerson, {"person", ClassKind::kThing});
  return t;
}

Detection square(double x0, double y0, double x1, double y1, double score,
                 ClassId cls = kCar) {
  return {Box::from_corners(x0, y0, x1, y1), cls, score, MaskGrid(1.0)};
}

SemanticMap uniform_sem(int w, int h, ClassId label) {
  return SemanticMap::create(w, h, std::vector<ClassId>(w * h, label), classes());
}

FusionConfig small_area() {
  FusionConfig cfg;
  cfg.stuff_min_area = 0;
  return cfg;
}

TEST(Fuse, SingleDetectionKept) {
  const std::vector<Detection> dets{square(2, 2, 6, 6, 0.9)};
  const FusionResult r = fuse(dets, uniform_sem(8, 8, kRoad), classes(), small_area());
  EXPECT_EQ(r.accepted, (std::vector<std::size_t>{0}));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool in = x >= 2 && x < 6 && y >= 2 && y < 6;
      EXPECT_EQ(r.panoptic.at(x, y), in ? 1u : 2u);
    }
  }
  EXPECT_EQ(r.panoptic.class_of(1), kCar);
  EXPECT_EQ(r.panoptic.class_of(2), kRoad);
}

TEST(Fuse, IdenticalMasksLowerScoreDiscarded) {
  const std::vector<Detection> dets{square(2, 2, 6, 6, 0.8),
                                    square(2, 2, 6, 6, 0.9, kPerson)};
  const FusionResult r = fuse(dets, uniform_sem(8, 8, kRoad), classes(), small_area());
  EXPECT_EQ(r.accepted, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.panoptic.class_of(r.panoptic.at(3, 3)), kPerson);
}

TEST(Fuse, CoverageExactlyHalfKept) {
  // Second detection keeps 8 of its 16 pixels: exactly the threshold.
  const std::vector<Detection> dets{square(0, 0, 4, 4, 0.9),
                                    square(0, 2, 4, 6, 0.5)};
  const FusionResult r = fuse(dets, uniform_sem(8, 8, kRoad), classes(), small_area());
  EXPECT_EQ(r.accepted.size(), 2u);
  EXPECT_EQ(r.panoptic.at(1, 1), 1u);
  EXPECT_EQ(r.panoptic.at(1, 3), 1u);
  EXPECT_EQ(r.panoptic.at(1, 4), 2u);
}

TEST(Fuse, CoverageBelowHalfDiscarded) {
  const std::vector<Detection> dets{square(0, 0, 4, 4, 0.9),
                                    square(0, 1, 4, 5, 0.5)};
  const FusionResult r = fuse(dets, uniform_sem(8, 8, kRoad), classes(), small_area());
  EXPECT_EQ(r.accepted, (std::vector<std::size_t>{0}));
  EXPECT_EQ(r.panoptic.class_of(r.panoptic.at(1, 4)), kRoad);
}

TEST(Fuse, StuffAreaBoundary) {
  // 64 x 64 = 4096 stuff pixels is kept.
  const FusionResult full = fuse({}, uniform_sem(64, 64, kSky), classes());
  EXPECT_EQ(full.panoptic.segments().size(), 1u);
  EXPECT_EQ(full.panoptic.at(10, 10), 1u);
  // One pixel taken by an instance leaves 4095: the stuff becomes void.
  const std::vector<Detection> dets{square(0, 0, 1, 1, 0.9)};
  const FusionResult cut = fuse(dets, uniform_sem(64, 64, kSky), classes());
  EXPECT_EQ(cut.panoptic.at(0, 0), 1u);
  EXPECT_EQ(cut.panoptic.at(10, 10), kVoidId);
  EXPECT_EQ(cut.panoptic.segments().size(), 1u);
}

TEST(Fuse, ThingSemanticLeftoverIsVoid) {
  const FusionResult r = fuse({}, uniform_sem(8, 8, kCar), classes(), small_area());
  for (SegmentId id : r.panoptic.pixels()) EXPECT_EQ(id, kVoidId);
}

TEST(Fuse, StuffIdsFollowInstancesInClassOrder) {
  std::vector<ClassId> labels(16, kSky);
  for (int i = 0; i < 8; ++i) labels[i] = kRoad;
  const auto sem = SemanticMap::create(4, 4, labels, classes());
  const std::vector<Detection> dets{square(0, 0, 1, 1, 0.9)};
  const FusionResult r = fuse(dets, sem, classes(), small_area());
  EXPECT_EQ(r.panoptic.class_of(1), kCar);
  EXPECT_EQ(r.panoptic.class_of(2), kRoad);
  EXPECT_EQ(r.panoptic.class_of(3), kSky);
}

TEST(Fuse, EmptyMaskDiscardedWithWarning) {
  std::vector<Detection> dets{square(0, 0, 4, 4, 0.9)};
  dets[0].mask = MaskGrid(0.0);
  const FusionResult r = fuse(dets, uniform_sem(8, 8, kRoad), classes(), small_area());
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_EQ(r.empty_masks, (std::vector<std::size_t>{0}));
}

TEST(Fuse, RejectsStuffDetectionAndBadScore) {
  EXPECT_THROW(fuse(std::vector<Detection>{square(0, 0, 2, 2, 0.5, kRoad)},
                    uniform_sem(4, 4, kRoad), classes()),
               std::invalid_argument);
  EXPECT_THROW(fuse(std::vector<Detection>{square(0, 0, 2, 2, 1.5)},
                    uniform_sem(4, 4, kRoad), classes()),
               std::invalid_argument);
  FusionConfig bad;
  bad.coverage_threshold = 0;
  EXPECT_THROW(fuse({}, uniform_sem(4, 4, kRoad), classes(), bad),
               std::invalid_argument);
}

std::vector<Detection> random_dets(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(0, 24), size(2, 12), u(0, 1);
  std::vector<Detection> dets;
  for (int i = 0; i < n; ++i) {
    std::vector<double> m(kMaskCells);
    for (double& v : m) v = u(rng) < 0.7 ? 0.9 : 0.1;
    dets.push_back({{pos(rng), pos(rng), size(rng), size(rng)},
                    (rng() % 2) ? kCar : kPerson, (i + 1) / (n + 1.0),
                    MaskGrid(m)});
  }
  return dets;
}

TEST(Fuse, InvariantsOnRandomInputs) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    auto dets = random_dets(rng, 8);
    const auto sem = uniform_sem(24, 24, t % 2 ? kRoad : kCar);
    const FusionResult r = fuse(dets, sem, classes(), small_area());
    for (std::size_t k = 0; k < r.accepted.size(); ++k) {
      const Detection& d = dets[r.accepted[k]];
      const BinaryGrid mask = paste_mask(d.mask, d.box, 24, 24);
      std::size_t kept = 0;
      for (std::size_t p = 0; p < mask.values.size(); ++p) {
        if (r.panoptic.pixels()[p] == k + 1) {
          EXPECT_TRUE(mask.values[p]);
          ++kept;
        }
      }
      EXPECT_GE(static_cast<double>(kept), 0.5 * mask.count());
    }
  }
}

TEST(Fuse, RemovingADetectionKeepsHigherScoredPixels) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 30; ++t) {
    auto dets = random_dets(rng, 8);
    const auto sem = uniform_sem(24, 24, kRoad);
    const FusionResult full = fuse(dets, sem, classes(), small_area());
    const std::size_t drop = rng() % dets.size();
    auto fewer = dets;
    fewer.erase(fewer.begin() + drop);
    const FusionResult less = fuse(fewer, sem, classes(), small_area());
    for (std::size_t k = 0; k < full.accepted.size(); ++k) {
      const std::size_t idx = full.accepted[k];
      if (dets[idx].score <= dets[drop].score) break;
      for (std::size_t p = 0; p < full.panoptic.pixel_count(); ++p) {
        EXPECT_EQ(full.panoptic.pixels()[p] == k + 1,
                  less.panoptic.pixels()[p] == k + 1);
      }
    }
  }
}

TEST(Fuse, OrderIndependentWithDistinctScores) {
  std::mt19937_64 rng(23);
  auto dets = random_dets(rng, 10);
  const auto sem = uniform_sem(24, 24, kRoad);
  const PanopticMap base = fuse(dets, sem, classes(), small_area()).panoptic;
  for (int t = 0; t < 10; ++t) {
    std::shuffle(dets.begin(), dets.end(), rng);
    EXPECT_EQ(fuse(dets, sem, classes(), small_area()).panoptic, base);
  }
}

}  // namespace
}  // namespace panoptic
