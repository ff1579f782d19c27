// Copyright 2026 The AFP Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration of the afp tool: built-in defaults, overlaid by an
// optional JSON file, overlaid by command-line flags.

#ifndef AFP_TOOLS_CONFIG_H_
#define AFP_TOOLS_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "afp/augment/augment.h"
#include "afp/common/error.h"
#include "afp/corpus/synth.h"
#include "afp/encoder/model.h"
#include "afp/encoder/train.h"
#include "afp/peakfp/peakfp.h"
#include "afp/pqindex/pqindex.h"
#include "json.hpp"

namespace afp::tool {

using nlohmann::json;

json DefaultConfig();

// Defaults merged with the file at `path` (if not empty). Keys the defaults
// do not know and values of the wrong type raise FormatError.
json LoadConfig(const std::filesystem::path& path);

// Sets the field at a dotted key, e.g. "train.epochs", from JSON text (bare
// words are taken as strings). Unknown keys raise InvalidArgument.
void SetField(json& config, const std::string& key, const std::string& value);

// Typed views. Each throws FormatError when a field has the wrong type.
uint64_t SeedOf(const json& config);
corpus::CorpusSpec CorpusSpecOf(const json& config);
EncoderConfig EncoderConfigOf(const json& config);
AugmentConfig AugmentConfigOf(const json& config);
AugmentKind AugmentKindOf(const json& config);
TrainConfig TrainConfigOf(const json& config);
IndexConfig IndexConfigOf(const json& config, size_t dim);
PeakConfig PeakConfigOf(const json& config);

template <typename T>
T Field(const json& config, const std::string& section, const std::string& key) {
  try {
    return config.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError("config field " + section + "." + key + ": " + e.what());
  }
}

}  // namespace afp::tool

#endif  // AFP_TOOLS_CONFIG_H_
