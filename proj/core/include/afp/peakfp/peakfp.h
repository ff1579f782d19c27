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

// Spectral-peak landmark fingerprinting: local maxima of a linear-frequency
// STFT are paired into (k0, k1, dn) triplets, packed into 32-bit hashes and
// stored in an inverted index. Matching votes on the time offset between
// stored and query anchors.

#ifndef AFP_PEAKFP_PEAKFP_H_
#define AFP_PEAKFP_PEAKFP_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "afp/dsp/audio.h"
#include "afp/dsp/features.h"

namespace afp {

struct SpectralPeak {
  uint32_t bin = 0;    // k
  uint32_t frame = 0;  // n

  friend auto operator<=>(const SpectralPeak&, const SpectralPeak&) = default;
};

struct Landmark {
  uint32_t hash = 0;
  uint32_t anchor_frame = 0;

  friend auto operator<=>(const Landmark&, const Landmark&) = default;
};

struct PeakConfig {
  StftParams stft;
  // Full window extent around a candidate cell.
  size_t neighborhood_bins = 15;
  size_t neighborhood_frames = 15;
  double min_db_above_median = 10.0;
  size_t fan_out = 5;
  uint32_t min_dt = 1;
  uint32_t max_dt = 200;
  uint32_t max_dk = 128;

  void Validate() const;
};

// Cells strictly greater than every other cell of their neighborhood and at
// least min_db_above_median above the median of their frame, sorted by
// (frame, bin).
std::vector<SpectralPeak> ExtractPeaks(const Spectrogram& spec, const PeakConfig& config = {});

// (k0 << 22) | (k1 << 12) | dn, with k < 1024 and 0 < dn < 4096.
uint32_t PackHash(uint32_t k0, uint32_t k1, uint32_t dn);
void UnpackHash(uint32_t hash, uint32_t* k0, uint32_t* k1, uint32_t* dn);

// Pairs each anchor with up to fan_out later peaks (in sorted order) lying
// in the target zone min_dt <= dn <= max_dt, |dk| <= max_dk.
std::vector<Landmark> HashLandmarks(const std::vector<SpectralPeak>& peaks,
                                    const PeakConfig& config = {});

// STFT, peak extraction and hashing of a whole signal.
std::vector<Landmark> FingerprintAudio(const AudioBuffer& audio,
                                       const PeakConfig& config = {});

struct PeakMatch {
  uint32_t song_id = 0;
  uint32_t votes = 0;
  // Stored anchor frame minus query anchor frame at the histogram peak.
  int64_t best_offset = 0;
};

class PeakIndex {
 public:
  struct Entry {
    uint32_t hash = 0;
    uint32_t song_id = 0;
    uint32_t anchor_frame = 0;

    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  void Add(uint32_t song_id, const std::vector<Landmark>& landmarks);

  // Songs ranked by their largest offset-histogram bin, descending; ties by
  // song_id. Empty when no hash collides.
  std::vector<PeakMatch> Match(const std::vector<Landmark>& query) const;

  size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Little-endian: magic "AFPH", u16 version, u64 count, then sorted
  // (hash, song_id, anchor) u32 triples.
  void Save(const std::filesystem::path& path) const;
  static PeakIndex Load(const std::filesystem::path& path);

 private:
  std::vector<Entry> entries_;  // sorted
};

}  // namespace afp

#endif  // AFP_PEAKFP_PEAKFP_H_
