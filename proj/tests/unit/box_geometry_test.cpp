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
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "panoptic/box_geometry.hpp"

namespace panoptic {
namespace {

TEST(DecodeBox, ZeroDeltaIsIdentity) {
  const Box ref{10, 20, 4, 6};
  EXPECT_EQ(decode_box(ref, {}), ref);
}

TEST(DecodeBox, ShiftsCenterByWidthFraction) {
  const Box out = decode_box({10, 10, 4, 2}, {0.5, 0, 0, 0});
  EXPECT_DOUBLE_EQ(out.cx, 12.0);
  EXPECT_DOUBLE_EQ(out.cy, 10.0);
}

TEST(DecodeBox, LogTwoDoublesWidth) {
  const Box out = decode_box({0, 0, 3, 5}, {0, 0, std::log(2.0), 0});
  EXPECT_NEAR(out.w, 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(out.h, 5.0);
}

TEST(DecodeBox, RejectsNonFinite) {
  EXPECT_THROW(decode_box({0, 0, 1, 1}, {std::nan(""), 0, 0, 0}), GeometryError);
}

TEST(EncodeBox, SameBoxIsZero) {
  const Box ref{1, 2, 3, 4};
  EXPECT_EQ(encode_box(ref, ref), BoxDelta{});
}

TEST(EncodeBox, DoubleWidthIsLogTwo) {
  EXPECT_NEAR(encode_box({0, 0, 4, 1}, {0, 0, 8, 1}).dw, std::log(2.0), 1e-15);
}

TEST(EncodeBox, RoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-100, 100), size(0.5, 300);
  for (int i = 0; i < 1000; ++i) {
    const Box ref{pos(rng), pos(rng), size(rng), size(rng)};
    const Box target{pos(rng), pos(rng), size(rng), size(rng)};
    const Box back = decode_box(ref, encode_box(ref, target));
    EXPECT_NEAR(back.cx, target.cx, 1e-9 * std::max(1.0, std::abs(target.cx)));
    EXPECT_NEAR(back.w, target.w, 1e-9 * target.w);
  }
}

TEST(IouBox, Examples) {
  const Box a = Box::from_corners(0, 0, 2, 2);
  EXPECT_DOUBLE_EQ(iou_box(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou_box(a, Box::from_corners(5, 5, 6, 6)), 0.0);
  EXPECT_NEAR(iou_box(a, Box::from_corners(1, 0, 3, 2)), 1.0 / 3.0, 1e-15);
}

TEST(IouBox, SymmetricAndBounded) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(0, 20), size(0.5, 10);
  for (int i = 0; i < 500; ++i) {
    const Box a{pos(rng), pos(rng), size(rng), size(rng)};
    const Box b{pos(rng), pos(rng), size(rng), size(rng)};
    const double v = iou_box(a, b);
    EXPECT_EQ(v, iou_box(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(FpnLevel, Examples) {
  EXPECT_EQ(fpn_level(224, 224), 3);
  EXPECT_EQ(fpn_level(14, 14), 1);
  EXPECT_EQ(fpn_level(1792, 1792), 4);
  EXPECT_EQ(fpn_level(112, 112), 2);
  EXPECT_EQ(fpn_level(111.9, 112), 1);
}

TEST(FpnLevel, Monotone) {
  int last = 1;
  for (double s = 1; s <= 4096; s += 0.5) {
    const int k = fpn_level(s, s);
    EXPECT_GE(k, last);
    last = k;
  }
}

TEST(GenerateAnchors, SquareLevel) {
  const std::vector<AnchorLevel> levels{{4, 64}};
  const std::vector<double> ratios{1};
  const auto anchors = generate_anchors(16, 16, levels, ratios);
  ASSERT_FALSE(anchors.empty());
  for (const auto& a : anchors) {
    EXPECT_DOUBLE_EQ(a.box.w, 8.0);
    EXPECT_DOUBLE_EQ(a.box.h, 8.0);
    EXPECT_EQ(a.level, 0);
  }
  // Centers 2 px from the border would stick out; only 6 and 10 fit.
  EXPECT_EQ(anchors.size(), 4u);
  EXPECT_DOUBLE_EQ(anchors.front().box.cx, 6.0);
}

TEST(GenerateAnchors, AspectRatioTwo) {
  const std::vector<AnchorLevel> levels{{4, 64}};
  const std::vector<double> ratios{2};
  const auto anchors = generate_anchors(64, 64, levels, ratios);
  ASSERT_FALSE(anchors.empty());
  EXPECT_NEAR(anchors[0].box.w, 8 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(anchors[0].box.h, 4 * std::sqrt(2.0), 1e-12);
}

TEST(GenerateAnchors, AllContained) {
  const AnchorConfig cfg = AnchorConfig::vistas();
  const auto anchors = generate_anchors(200, 150, cfg.levels, cfg.aspect_ratios);
  for (const auto& a : anchors) {
    EXPECT_GE(a.box.x0(), 0.0);
    EXPECT_GE(a.box.y0(), 0.0);
    EXPECT_LE(a.box.x1(), 200.0);
    EXPECT_LE(a.box.y1(), 150.0);
  }
}

TEST(GenerateAnchors, EmptyRatiosRejected) {
  const std::vector<AnchorLevel> levels{{4, 64}};
  EXPECT_THROW(generate_anchors(16, 16, levels, {}), GeometryError);
}

TEST(AnchorConfig, JsonRoundTrip) {
  const AnchorConfig cfg = AnchorConfig::vistas();
  const AnchorConfig back = AnchorConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.levels.size(), 5u);
  EXPECT_DOUBLE_EQ(back.nms.objectness_iou, 0.7);
}

TEST(Nms, SingleBoxKept) {
  const std::vector<ScoredBox> boxes{{{5, 5, 2, 2}, 0.3, {}}};
  EXPECT_EQ(nms(boxes, 0.5, false), (std::vector<std::size_t>{0}));
}

TEST(Nms, DuplicateSuppressed) {
  const std::vector<ScoredBox> boxes{{{5, 5, 2, 2}, 0.8, {}},
                                     {{5, 5, 2, 2}, 0.9, {}}};
  EXPECT_EQ(nms(boxes, 0.99, false), (std::vector<std::size_t>{1}));
}

TEST(Nms, PerClassDoesNotCrossClasses) {
  const std::vector<ScoredBox> boxes{{{5, 5, 2, 2}, 0.8, 1u},
                                     {{5, 5, 2, 2}, 0.9, 2u}};
  EXPECT_EQ(nms(boxes, 0.5, true).size(), 2u);
  EXPECT_EQ(nms(boxes, 0.5, false).size(), 1u);
}

TEST(Nms, MatchesOracleOnRandomSets) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(0, 20), size(1, 8), score(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<ScoredBox> boxes(5);
    for (auto& b : boxes) {
      b = {{pos(rng), pos(rng), size(rng), size(rng)}, score(rng),
           static_cast<std::uint32_t>(rng() % 2)};
    }
    for (bool per_class : {false, true}) {
      EXPECT_EQ(nms(boxes, 0.3, per_class),
                testing::oracle_nms(boxes, 0.3, per_class));
    }
  }
}

TEST(Nms, EmptyInput) { EXPECT_TRUE(nms({}, 0.5, false).empty()); }

TEST(ClipBox, Examples) {
  const Box inner{5, 5, 2, 2};
  EXPECT_EQ(clip_box(inner, 10, 10), inner);
  const Box left = clip_box(Box::from_corners(-2, 3, 4, 5), 10, 10);
  EXPECT_DOUBLE_EQ(left.x0(), 0.0);
  EXPECT_DOUBLE_EQ(left.x1(), 4.0);
  const Box corner = clip_box(Box::from_corners(-2, -2, 2, 2), 10, 10);
  EXPECT_EQ(corner, Box::from_corners(0, 0, 2, 2));
  EXPECT_THROW(clip_box(Box::from_corners(20, 20, 30, 30), 10, 10),
               GeometryError);
}

}  // namespace
}  // namespace panoptic
