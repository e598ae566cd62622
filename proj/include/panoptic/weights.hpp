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

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "panoptic/tensor_ops.hpp"

namespace panoptic {

class WeightContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
};

using TensorMap = std::map<std::string, Tensor>;

// Flat weight container: an 8-byte little-endian header length, a JSON
// header {name: {"dtype": "F32", "shape": [...], "data_offsets": [b, e]}},
// then the little-endian float32 payload. Offsets are relative to the
// payload start.
TensorMap read_weight_container(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_weight_container(const TensorMap& tensors);

ConvWeights conv_weights_from_tensor(const Tensor& tensor);

// Expects tensors "dilation1", "dilation6", "pool_projection", "output".
MiniDLWeights minidl_weights_from(const TensorMap& tensors,
                                  int pool_kernel = 64);

}  // namespace panoptic
