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
#include "panoptic/weights.hpp"

#include <bit>
#include <stdexcept>

#include "json.hpp"

namespace panoptic {

namespace {

std::uint32_t load_u32_le(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

void store_u32_le(std::uint32_t v, std::vector<std::uint8_t>& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw WeightContainerError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

TensorMap read_weight_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) {
    throw WeightContainerError("weight container shorter than its header length");
  }
  std::uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) header_len |= std::uint64_t{bytes[i]} << (8 * i);
  if (header_len > bytes.size() - 8) {
    throw WeightContainerError("weight container header overruns the file");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8,
                                   bytes.begin() + 8 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw WeightContainerError(std::string("weight container header: ") + e.what());
  }
  const auto payload = bytes.subspan(8 + header_len);

  TensorMap out;
  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") continue;
    if (entry.value("dtype", std::string()) != "F32") {
      throw WeightContainerError("tensor '" + name + "' is not F32");
    }
    Tensor tensor;
    tensor.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
    if (offsets.size() != 2 || offsets[0] > offsets[1] ||
        offsets[1] > payload.size()) {
      throw WeightContainerError("tensor '" + name + "' has bad data_offsets");
    }
    const std::size_t count = tensor.element_count();
    if (offsets[1] - offsets[0] != 4 * count) {
      throw WeightContainerError("tensor '" + name +
                           "' byte range does not match its shape");
    }
    tensor.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      tensor.values[i] = std::bit_cast<float>(
          load_u32_le(payload.data() + offsets[0] + 4 * i));
    }
    out.emplace(name, std::move(tensor));
  }
  return out;
}

std::vector<std::uint8_t> write_weight_container(const TensorMap& tensors) {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::uint8_t> payload;
  for (const auto& [name, tensor] : tensors) {
    if (tensor.values.size() != tensor.element_count()) {
      throw WeightContainerError("tensor '" + name +
                           "' value count does not match its shape");
    }
    const std::size_t begin = payload.size();
    for (float v : tensor.values) store_u32_le(std::bit_cast<std::uint32_t>(v), payload);
    header[name] = {{"dtype", "F32"},
                    {"shape", tensor.shape},
                    {"data_offsets", {begin, payload.size()}}};
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(8 + text.size() + payload.size());
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ConvWeights conv_weights_from_tensor(const Tensor& tensor) {
  if (tensor.shape.size() != 4 || tensor.shape[2] != tensor.shape[3]) {
    throw ShapeError("convolution tensor must be [out, in, k, k]");
  }
  ConvWeights w;
  w.out_channels = static_cast<int>(tensor.shape[0]);
  w.in_channels = static_cast<int>(tensor.shape[1]);
  w.kernel = static_cast<int>(tensor.shape[2]);
  w.values.assign(tensor.values.begin(), tensor.values.end());
  w.validate();
  return w;
}

MiniDLWeights minidl_weights_from(const TensorMap& tensors, int pool_kernel) {
  auto get = [&](const char* name) -> const Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw ShapeError(std::string("missing MiniDL tensor '") + name + "'");
    }
    return it->second;
  };
  MiniDLWeights w;
  w.dilation1 = conv_weights_from_tensor(get("dilation1"));
  w.dilation6 = conv_weights_from_tensor(get("dilation6"));
  w.pool_projection = conv_weights_from_tensor(get("pool_projection"));
  w.output = conv_weights_from_tensor(get("output"));
  w.pool_kernel = pool_kernel;
  w.validate(w.dilation1.in_channels);
  return w;
}

}  // namespace panoptic
