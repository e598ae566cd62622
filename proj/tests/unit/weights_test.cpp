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

#include <cstring>

#include "panoptic/weights.hpp"

namespace panoptic {
namespace {

TEST(WeightContainer, RoundTrip) {
  TensorMap tensors;
  tensors["a"] = {{2, 3}, {1, 2, 3, 4, 5, 6.5f}};
  tensors["b"] = {{1}, {-0.25f}};
  const auto bytes = write_weight_container(tensors);
  const TensorMap back = read_weight_container(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.at("a").shape, tensors["a"].shape);
  EXPECT_EQ(back.at("a").values, tensors["a"].values);
  EXPECT_EQ(back.at("b").values, tensors["b"].values);
}

TEST(WeightContainer, LittleEndianLayout) {
  TensorMap tensors;
  tensors["x"] = {{1}, {1.0f}};
  const auto bytes = write_weight_container(tensors);
  std::uint64_t header = 0;
  for (int i = 7; i >= 0; --i) header = header << 8 | bytes[i];
  ASSERT_EQ(bytes.size(), 8 + header + 4);
  // 1.0f = 0x3f800000
  EXPECT_EQ(bytes[8 + header + 3], 0x3f);
  EXPECT_EQ(bytes[8 + header + 2], 0x80);
  const auto doc = nlohmann::json::parse(
      std::string(bytes.begin() + 8, bytes.begin() + 8 + header));
  EXPECT_EQ(doc["x"]["dtype"], "F32");
}

TEST(WeightContainer, RejectsTruncation) {
  TensorMap tensors;
  tensors["a"] = {{4}, {1, 2, 3, 4}};
  auto bytes = write_weight_container(tensors);
  bytes.pop_back();
  EXPECT_THROW(read_weight_container(bytes), WeightContainerError);
  EXPECT_THROW(read_weight_container(std::vector<std::uint8_t>{1, 2}),
               WeightContainerError);
}

TEST(WeightContainer, RejectsShapeSizeMismatch) {
  TensorMap tensors;
  tensors["a"] = {{3}, {1, 2}};
  EXPECT_ANY_THROW(write_weight_container(tensors));
}

TEST(WeightContainer, MiniDLFromTensors) {
  const int c = 2;
  TensorMap t;
  t["dilation1"] = {{128, c, 3, 3}, std::vector<float>(128 * c * 9, 0.5f)};
  t["dilation6"] = {{128, c, 3, 3}, std::vector<float>(128 * c * 9, 0.0f)};
  t["pool_projection"] = {{128, c, 1, 1}, std::vector<float>(128 * c, 0.0f)};
  t["output"] = {{128, 384, 3, 3}, std::vector<float>(128 * 384 * 9, 0.0f)};
  const MiniDLWeights w =
      minidl_weights_from(read_weight_container(write_weight_container(t)), 4);
  EXPECT_EQ(w.dilation1.in_channels, c);
  EXPECT_EQ(w.dilation1.at(5, 1, 2, 2), 0.5);
  EXPECT_EQ(w.pool_kernel, 4);
  t.erase("output");
  EXPECT_THROW(minidl_weights_from(t), ShapeError);
}

}  // namespace
}  // namespace panoptic
