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

#ifndef AFP_AUGMENT_POOL_H_
#define AFP_AUGMENT_POOL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp {

// A directory of WAV files. Files are enumerated in sorted filename order
// and resampled to 8 kHz on load.
struct PoolEntry {
  std::string name;
  AudioBuffer audio;
};

std::vector<std::string> ListWavFiles(const std::filesystem::path& dir);

// Split assignment by filename. Stored as `manifest.json` in the pool
// directory: {"train": [...], "validation": [...], "test": [...]}.
struct PoolManifest {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& split(const std::string& name) const;
};

// Deterministic split of sorted names by cumulative fractions
// (train, validation, test); every non-empty split gets at least one file
// when there are enough names.
PoolManifest SplitNames(std::vector<std::string> names, double train_fraction,
                        double validation_fraction);

PoolManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const PoolManifest& manifest);

// Loads the named split of a pool. Uses `manifest.json` when present,
// otherwise SplitNames with the given fractions. An empty `split` loads
// every file.
std::vector<PoolEntry> LoadPool(const std::filesystem::path& dir,
                                const std::string& split = "",
                                double train_fraction = 0.7,
                                double validation_fraction = 0.2);

std::vector<AudioBuffer> AudioOf(std::vector<PoolEntry> entries);

}  // namespace afp

#endif  // AFP_AUGMENT_POOL_H_
