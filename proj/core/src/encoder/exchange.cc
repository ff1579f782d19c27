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

#include "afp/encoder/exchange.h"

#include <cmath>
#include <fstream>
#include <string>

#include "afp/common/binary_io.h"
#include "afp/common/error.h"
#include "json.hpp"

namespace afp {
namespace {

constexpr uint16_t kExchangeVersion = 1;

}  // namespace

void EmbeddingTable::Append(const SegmentRef& ref, std::span<const float> embedding) {
  if (refs.empty() && dim == 0) dim = embedding.size();
  Require(embedding.size() == dim, "embedding dimension mismatch");
  refs.push_back(ref);
  values.insert(values.end(), embedding.begin(), embedding.end());
}

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void ExportEmbeddings(const std::filesystem::path& path,
                      const EmbeddingTable& table) {
  Require(table.values.size() == table.rows() * table.dim,
          "embedding table is inconsistent");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  io::WriteMagic(out, "AFPE");
  io::WriteLE<uint16_t>(out, kExchangeVersion);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(table.dim));
  io::WriteLE<uint64_t>(out, table.rows());
  io::WriteFloats(out, table.values);
  if (!out) throw FormatError("write failed: " + path.string());

  nlohmann::json refs = nlohmann::json::array();
  for (const SegmentRef& r : table.refs) {
    refs.push_back({{"song_id", r.song_id}, {"segment_index", r.segment_index}});
  }
  std::ofstream side(SidecarPath(path));
  if (!side) throw FormatError("cannot write " + SidecarPath(path).string());
  side << refs.dump() << "\n";
}

EmbeddingTable ImportEmbeddings(const std::filesystem::path& path,
                                size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  io::ExpectMagic(in, "AFPE");
  const uint16_t version = io::ReadLE<uint16_t>(in);
  if (version != kExchangeVersion) {
    throw FormatError("unsupported embedding file version " + std::to_string(version));
  }
  EmbeddingTable table;
  table.dim = io::ReadLE<uint32_t>(in);
  const uint64_t rows = io::ReadLE<uint64_t>(in);
  if (table.dim == 0) throw FormatError("embedding dimension is zero");
  if (expected_dim != 0 && table.dim != expected_dim) {
    throw FormatError("embedding dimension " + std::to_string(table.dim) +
                      " does not match expected " + std::to_string(expected_dim));
  }
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<uint64_t>(in.tellg()) - 18;
  if (remaining != rows * table.dim * sizeof(float)) {
    throw FormatError("embedding payload size does not match the header");
  }
  in.seekg(18);
  table.values.resize(rows * table.dim);
  io::ReadFloats(in, table.values);

  for (uint64_t r = 0; r < rows; ++r) {
    float* row = table.values.data() + r * table.dim;
    double sq = 0.0;
    for (size_t d = 0; d < table.dim; ++d) {
      if (!std::isfinite(row[d])) {
        throw FormatError("row " + std::to_string(r) + " has a non-finite value");
      }
      sq += static_cast<double>(row[d]) * row[d];
    }
    const double norm = std::sqrt(sq);
    if (std::fabs(norm - 1.0) > 1e-3) {
      throw FormatError("row " + std::to_string(r) + " has norm " +
                        std::to_string(norm) + ", expected 1 within 1e-3");
    }
    if (std::fabs(norm - 1.0) > 1e-6) {
      for (size_t d = 0; d < table.dim; ++d) {
        row[d] = static_cast<float>(row[d] / norm);
      }
    }
  }

  std::ifstream side(SidecarPath(path));
  if (!side) throw FormatError("missing sidecar " + SidecarPath(path).string());
  nlohmann::json refs;
  try {
    side >> refs;
    if (!refs.is_array() || refs.size() != rows) {
      throw FormatError("sidecar must list one entry per row");
    }
    for (const auto& r : refs) {
      table.refs.push_back({r.at("song_id").get<uint32_t>(),
                            r.at("segment_index").get<uint32_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad sidecar: ") + e.what());
  }
  return table;
}

}  // namespace afp
