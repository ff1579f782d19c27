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

// Embedding exchange file, used to feed vectors from external encoders into
// the index. Little-endian: magic "AFPE", u16 version, u32 dimension,
// u64 row count, then rows of float32. A JSON sidecar (<path>.json) holds an
// array of {"song_id", "segment_index"} objects aligned by row.

#ifndef AFP_ENCODER_EXCHANGE_H_
#define AFP_ENCODER_EXCHANGE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp {

struct EmbeddingTable {
  size_t dim = 0;
  std::vector<SegmentRef> refs;
  std::vector<float> values;  // refs.size() x dim, row-major

  size_t rows() const { return refs.size(); }
  std::span<const float> row(size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }
  void Append(const SegmentRef& ref, std::span<const float> embedding);
};

std::filesystem::path SidecarPath(const std::filesystem::path& path);

void ExportEmbeddings(const std::filesystem::path& path,
                      const EmbeddingTable& table);

// Rows whose norm is within 1e-3 of 1 are renormalized (left untouched when
// already within 1e-6); others are rejected. Throws FormatError on a bad
// header, a truncated file, a non-finite or off-norm row, a sidecar length
// mismatch, or a dimension different from `expected_dim` when non-zero.
EmbeddingTable ImportEmbeddings(const std::filesystem::path& path,
                                size_t expected_dim = 0);

}  // namespace afp

#endif  // AFP_ENCODER_EXCHANGE_H_
