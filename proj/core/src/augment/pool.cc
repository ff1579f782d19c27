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

#include "afp/augment/pool.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "afp/common/error.h"
#include "afp/dsp/features.h"
#include "afp/dsp/wav.h"
#include "json.hpp"

namespace afp {

namespace fs = std::filesystem;

std::vector<std::string> ListWavFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw FormatError("not a directory: " + dir.string());
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

const std::vector<std::string>& PoolManifest::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "validation") return validation;
  if (name == "test") return test;
  throw InvalidArgument("unknown split '" + name + "'");
}

PoolManifest SplitNames(std::vector<std::string> names, double train_fraction,
                        double validation_fraction) {
  Require(train_fraction >= 0 && validation_fraction >= 0 &&
              train_fraction + validation_fraction <= 1.0,
          "split fractions must be non-negative and sum to at most 1");
  std::sort(names.begin(), names.end());
  const size_t n = names.size();
  auto n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
  auto n_val = static_cast<size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  const double test_fraction = 1.0 - train_fraction - validation_fraction;
  // Keep a file in every split that asks for one, as long as there are files
  // to spare.
  if (test_fraction > 1e-9 && n >= 3 && n_train + n_val >= n) {
    if (n_train > n_val) --n_train; else --n_val;
  }
  if (validation_fraction > 0 && n_val == 0 && n >= 2 && n_train > 1) {
    --n_train;
    ++n_val;
  }
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  PoolManifest m;
  m.train.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_train));
  m.validation.assign(names.begin() + static_cast<std::ptrdiff_t>(n_train),
                      names.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  m.test.assign(names.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), names.end());
  return m;
}

PoolManifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    PoolManifest m;
    m.train = j.value("train", std::vector<std::string>{});
    m.validation = j.value("validation", std::vector<std::string>{});
    m.test = j.value("test", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteManifest(const fs::path& path, const PoolManifest& manifest) {
  nlohmann::json j;
  j["train"] = manifest.train;
  j["validation"] = manifest.validation;
  j["test"] = manifest.test;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<PoolEntry> LoadPool(const fs::path& dir, const std::string& split,
                                double train_fraction,
                                double validation_fraction) {
  std::vector<std::string> names = ListWavFiles(dir);
  if (!split.empty()) {
    const fs::path manifest_path = dir / "manifest.json";
    const PoolManifest manifest =
        fs::exists(manifest_path)
            ? ReadManifest(manifest_path)
            : SplitNames(names, train_fraction, validation_fraction);
    names = manifest.split(split);
    std::sort(names.begin(), names.end());
  }
  std::vector<PoolEntry> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    AudioBuffer audio = LoadWav(dir / name);
    if (audio.sample_rate_hz != kSampleRateHz) audio = Resample(audio, kSampleRateHz);
    out.push_back({name, std::move(audio)});
  }
  return out;
}

std::vector<AudioBuffer> AudioOf(std::vector<PoolEntry> entries) {
  std::vector<AudioBuffer> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.audio));
  return out;
}

}  // namespace afp
