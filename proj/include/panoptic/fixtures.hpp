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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "panoptic/fusion.hpp"
#include "panoptic/loss_oracle.hpp"

namespace panoptic {

// A JSON document that does not follow the expected schema. `record_index`
// names the offending array element when there is one.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what,
              std::optional<std::size_t> record_index = std::nullopt)
      : std::runtime_error(what), record_index_(record_index) {}

  std::optional<std::size_t> record_index() const { return record_index_; }

 private:
  std::optional<std::size_t> record_index_;
};

// Accepts a bare array or {"detections": [...]} of
// {box:[cx,cy,w,h], class_id, score, mask:[784 floats]}.
std::vector<Detection> detections_from_json(const nlohmann::json& doc);
nlohmann::json detections_to_json(std::span<const Detection> detections);

// Loss fixture bundle {semantic, rpn, rsh}; the schema is described in the
// README.
// Sections may be omitted, in which case their losses are 0 and an
// "<section>_absent" flag is reported.
LossReport evaluate_loss_fixture(const nlohmann::json& bundle);

}  // namespace panoptic
