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

#include "afp/retrieval/catalog.h"

#include <fstream>

#include "afp/augment/pool.h"
#include "afp/common/error.h"
#include "afp/dsp/features.h"
#include "afp/dsp/wav.h"
#include "json.hpp"

namespace afp {

namespace fs = std::filesystem;

SongCatalog ReadCatalog(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    SongCatalog catalog;
    for (const auto& [key, value] : j.items()) {
      SongInfo info;
      info.title = value.at("title").get<std::string>();
      info.source_path = value.at("source_path").get<std::string>();
      info.duration_s = value.at("duration_s").get<double>();
      catalog[static_cast<uint32_t>(std::stoul(key))] = std::move(info);
    }
    return catalog;
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteCatalog(const fs::path& path, const SongCatalog& catalog) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [id, info] : catalog) {
    j[std::to_string(id)] = {{"title", info.title},
                             {"source_path", info.source_path},
                             {"duration_s", info.duration_s}};
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<Song> LoadSongDirectory(const fs::path& dir) {
  std::vector<Song> songs;
  auto load = [&](uint32_t id, const fs::path& file, SongInfo info) {
    AudioBuffer audio = LoadWav(file);
    if (audio.sample_rate_hz != kSampleRateHz) audio = Resample(audio, kSampleRateHz);
    info.duration_s = audio.duration_s();
    songs.push_back({id, std::move(info), std::move(audio)});
  };
  const fs::path catalog_path = dir / "songs.json";
  if (fs::exists(catalog_path)) {
    for (const auto& [id, info] : ReadCatalog(catalog_path)) {
      fs::path file = info.source_path;
      if (file.is_relative()) file = dir / file;
      load(id, file, info);
    }
  } else {
    uint32_t id = 0;
    for (const auto& name : ListWavFiles(dir)) {
      load(id++, dir / name,
           {fs::path(name).stem().string(), (dir / name).string(), 0.0});
    }
  }
  return songs;
}

}  // namespace afp
