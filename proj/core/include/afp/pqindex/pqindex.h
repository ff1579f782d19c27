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

// Inverted-file index with residual product quantization. A coarse k-means
// quantizer partitions the space into K cells; each vector is stored in its
// nearest cell as m one-byte sub-centroid indices encoding the residual
// (vector minus cell centroid). Search visits the nprobe nearest cells and
// scores entries with asymmetric distance lookup tables.

#ifndef AFP_PQINDEX_PQINDEX_H_
#define AFP_PQINDEX_PQINDEX_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp {

struct KMeansResult {
  std::vector<float> centroids;  // k x d, row-major
  // Mean squared distance to the assigned centroid after each assignment.
  std::vector<double> distortion;
};

// k-means++ seeding followed by up to `iterations` Lloyd steps. An empty
// cluster takes the point farthest from its centroid in the largest
// cluster. Throws InvalidArgument with fewer than k distinct points and
// NumericalError if the distortion ever increases.
KMeansResult KMeans(std::span<const float> points, size_t dim, size_t k,
                    size_t iterations, uint64_t seed);

struct IndexConfig {
  size_t dim = 64;
  size_t subquantizers = 32;  // m
  size_t code_bits = 8;       // k* = 2^code_bits
  size_t coarse_cells = 64;   // K
  size_t nprobe = 4;
  uint64_t seed = 0;
  size_t kmeans_iterations = 25;
  size_t max_training_sample = 200000;
  // Add() renormalizes inputs within 1e-3 of unit norm and rejects others.
  // Not persisted.
  bool require_unit_norm = true;

  size_t sub_dim() const { return dim / subquantizers; }
  size_t sub_centroids() const { return size_t{1} << code_bits; }
  // Throws InvalidArgument unless m divides D, 4 <= code_bits <= 8 and
  // 1 <= nprobe <= K.
  void Validate() const;
};

struct SearchHit {
  SegmentRef ref;
  double distance = 0.0;  // approximate squared Euclidean

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct SizeReport {
  uint64_t code_bytes_total = 0;
  uint64_t serialized_bytes = 0;
};

// entries * m * code_bits / 8, rounded up.
uint64_t CodeBytes(uint64_t entries, size_t subquantizers, size_t code_bits);

class FingerprintIndex {
 public:
  explicit FingerprintIndex(const IndexConfig& config);

  const IndexConfig& config() const { return config_; }
  bool trained() const { return !coarse_.empty(); }

  // Trains the coarse quantizer on raw vectors and the m sub-codebooks on
  // residuals. Needs at least 4 * max(K, k*) rows; larger samples are
  // subsampled to max_training_sample.
  void Train(std::span<const float> sample);

  // Throws InvalidArgument when untrained or on a bad vector.
  void Add(const SegmentRef& ref, std::span<const float> embedding);

  // Nearest coarse cell and residual code of `v`.
  std::pair<uint32_t, std::vector<uint8_t>> Encode(std::span<const float> v) const;
  std::vector<float> Decode(uint32_t cell, std::span<const uint8_t> code) const;

  // Ascending by distance, ties by (song_id, segment_index). nprobe = 0
  // uses the configured default.
  std::vector<SearchHit> Search(std::span<const float> query, size_t top_k,
                                size_t nprobe = 0) const;

  size_t size() const { return entry_count_; }
  size_t renormalized_count() const { return renormalized_; }
  const std::vector<float>& coarse_centroids() const { return coarse_; }
  // Sub-codebook s: k* x (D/m) floats.
  std::span<const float> sub_codebook(size_t s) const;
  const std::vector<SegmentRef>& cell_refs(size_t cell) const { return cells_[cell].refs; }

  // 23 + 4KD + 4 k* D + 12K + n (8 + m).
  uint64_t SerializedSize() const;
  SizeReport Report() const;

  void Save(const std::filesystem::path& path) const;
  void Write(std::ostream& out) const;
  static FingerprintIndex Load(const std::filesystem::path& path);

 private:
  struct Cell {
    std::vector<SegmentRef> refs;
    std::vector<uint8_t> codes;  // refs.size() x m
  };

  std::vector<double> CoarseDistances(std::span<const float> v) const;

  IndexConfig config_;
  std::vector<float> coarse_;  // K x D
  std::vector<float> sub_;     // m x k* x (D/m)
  std::vector<Cell> cells_;
  size_t entry_count_ = 0;
  size_t renormalized_ = 0;
};

}  // namespace afp

#endif  // AFP_PQINDEX_PQINDEX_H_
