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

#ifndef AFP_RETRIEVAL_CATALOG_H_
#define AFP_RETRIEVAL_CATALOG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp {

struct SongInfo {
  std::string title;
  std::string source_path;
  double duration_s = 0.0;

  friend bool operator==(const SongInfo&, const SongInfo&) = default;
};

// Song metadata sidecar: JSON object song_id -> {title, source_path,
// duration_s}.
using SongCatalog = std::map<uint32_t, SongInfo>;

SongCatalog ReadCatalog(const std::filesystem::path& path);
void WriteCatalog(const std::filesystem::path& path, const SongCatalog& catalog);

struct Song {
  uint32_t id = 0;
  SongInfo info;
  AudioBuffer audio;
};

// Loads a song directory. With a `songs.json` catalog the listed files are
// loaded under their ids; otherwise every WAV is loaded in sorted filename
// order with ids 0..n-1. Audio is resampled to 8 kHz.
std::vector<Song> LoadSongDirectory(const std::filesystem::path& dir);

}  // namespace afp

#endif  // AFP_RETRIEVAL_CATALOG_H_
