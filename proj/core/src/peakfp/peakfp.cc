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

#include "afp/peakfp/peakfp.h"

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_map>

#include "afp/common/binary_io.h"
#include "afp/common/error.h"

namespace afp {
namespace {

constexpr uint16_t kPeakIndexVersion = 1;

// Sliding maximum over a window of `radius` on each side, along a strided
// line of `count` values.
void LineMax(const double* in, double* out, size_t count, size_t stride,
             size_t radius) {
  for (size_t i = 0; i < count; ++i) {
    const size_t lo = i >= radius ? i - radius : 0;
    const size_t hi = std::min(count - 1, i + radius);
    double m = in[lo * stride];
    for (size_t j = lo + 1; j <= hi; ++j) m = std::max(m, in[j * stride]);
    out[i * stride] = m;
  }
}

}  // namespace

void PeakConfig::Validate() const {
  Require(neighborhood_bins >= 1 && neighborhood_frames >= 1,
          "peak neighborhood must be non-empty");
  Require(fan_out >= 1, "fan_out must be at least 1");
  Require(min_dt >= 1 && min_dt <= max_dt && max_dt < 4096,
          "target zone needs 1 <= min_dt <= max_dt < 4096");
  Require(stft.fft_size / 2 < 1024, "STFT bins must fit in 10 bits");
}

std::vector<SpectralPeak> ExtractPeaks(const Spectrogram& spec, const PeakConfig& config) {
  config.Validate();
  const size_t bins = spec.freq_bins, frames = spec.time_frames;
  std::vector<SpectralPeak> peaks;
  if (bins == 0 || frames == 0) return peaks;
  Require(spec.values.size() == bins * frames, "spectrogram size mismatch");
  const size_t rk = config.neighborhood_bins / 2, rn = config.neighborhood_frames / 2;

  // Separable window maximum: along frames, then along bins.
  std::vector<double> tmp(spec.values.size()), wmax(spec.values.size());
  for (size_t k = 0; k < bins; ++k) {
    LineMax(spec.values.data() + k * frames, tmp.data() + k * frames, frames, 1, rn);
  }
  for (size_t n = 0; n < frames; ++n) {
    LineMax(tmp.data() + n, wmax.data() + n, bins, frames, rk);
  }

  std::vector<double> column(bins);
  for (size_t n = 0; n < frames; ++n) {
    for (size_t k = 0; k < bins; ++k) column[k] = spec.at(k, n);
    std::nth_element(column.begin(), column.begin() + bins / 2, column.end());
    double median = column[bins / 2];
    if (bins % 2 == 0) {
      median = 0.5 * (median + *std::max_element(column.begin(), column.begin() + bins / 2));
    }
    const double floor = median + config.min_db_above_median;
    for (size_t k = 0; k < bins; ++k) {
      const double v = spec.at(k, n);
      if (v != wmax[k * frames + n] || v < floor) continue;
      // Reject plateaus: another cell of the window reaches the same value.
      bool unique = true;
      const size_t k0 = k >= rk ? k - rk : 0, k1 = std::min(bins - 1, k + rk);
      const size_t n0 = n >= rn ? n - rn : 0, n1 = std::min(frames - 1, n + rn);
      for (size_t kk = k0; kk <= k1 && unique; ++kk) {
        for (size_t nn = n0; nn <= n1; ++nn) {
          if ((kk != k || nn != n) && spec.at(kk, nn) >= v) {
            unique = false;
            break;
          }
        }
      }
      if (unique) peaks.push_back({static_cast<uint32_t>(k), static_cast<uint32_t>(n)});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const SpectralPeak& a, const SpectralPeak& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.bin < b.bin;
  });
  return peaks;
}

uint32_t PackHash(uint32_t k0, uint32_t k1, uint32_t dn) {
  Require(k0 < 1024 && k1 < 1024, "bin index exceeds 10 bits");
  Require(dn > 0 && dn < 4096, "frame delta must lie in (0, 4096)");
  return (k0 << 22) | (k1 << 12) | dn;
}

void UnpackHash(uint32_t hash, uint32_t* k0, uint32_t* k1, uint32_t* dn) {
  *k0 = hash >> 22;
  *k1 = (hash >> 12) & 0x3FFu;
  *dn = hash & 0xFFFu;
}

std::vector<Landmark> HashLandmarks(const std::vector<SpectralPeak>& peaks,
                                    const PeakConfig& config) {
  config.Validate();
  std::vector<Landmark> out;
  for (size_t i = 0; i < peaks.size(); ++i) {
    const SpectralPeak& a = peaks[i];
    size_t paired = 0;
    for (size_t j = i + 1; j < peaks.size() && paired < config.fan_out; ++j) {
      const SpectralPeak& b = peaks[j];
      const uint32_t dn = b.frame - a.frame;
      if (dn > config.max_dt) break;
      if (dn < config.min_dt) continue;
      const uint32_t dk = a.bin > b.bin ? a.bin - b.bin : b.bin - a.bin;
      if (dk > config.max_dk) continue;
      out.push_back({PackHash(a.bin, b.bin, dn), a.frame});
      ++paired;
    }
  }
  return out;
}

std::vector<Landmark> FingerprintAudio(const AudioBuffer& audio,
                                       const PeakConfig& config) {
  if (audio.size() < config.stft.fft_size) return {};
  return HashLandmarks(ExtractPeaks(StftMagnitudeDb(audio, config.stft), config),
                       config);
}

void PeakIndex::Add(uint32_t song_id, const std::vector<Landmark>& landmarks) {
  const size_t old = entries_.size();
  for (const Landmark& l : landmarks) entries_.push_back({l.hash, song_id, l.anchor_frame});
  std::sort(entries_.begin() + static_cast<std::ptrdiff_t>(old), entries_.end());
  std::inplace_merge(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(old),
                     entries_.end());
}

std::vector<PeakMatch> PeakIndex::Match(const std::vector<Landmark>& query) const {
  // (song, offset) -> votes
  std::unordered_map<uint64_t, uint32_t> histogram;
  for (const Landmark& q : query) {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), Entry{q.hash, 0, 0});
    for (auto it = lo; it != entries_.end() && it->hash == q.hash; ++it) {
      const int64_t offset =
          static_cast<int64_t>(it->anchor_frame) - static_cast<int64_t>(q.anchor_frame);
      const uint64_t key = (static_cast<uint64_t>(it->song_id) << 32) |
                           static_cast<uint32_t>(static_cast<int32_t>(offset));
      ++histogram[key];
    }
  }
  std::unordered_map<uint32_t, PeakMatch> best;
  for (const auto& [key, votes] : histogram) {
    const uint32_t song = static_cast<uint32_t>(key >> 32);
    const int64_t offset = static_cast<int32_t>(static_cast<uint32_t>(key));
    auto [it, inserted] = best.try_emplace(song, PeakMatch{song, votes, offset});
    PeakMatch& m = it->second;
    if (!inserted && (votes > m.votes || (votes == m.votes && offset < m.best_offset))) {
      m.votes = votes;
      m.best_offset = offset;
    }
  }
  std::vector<PeakMatch> ranked;
  for (const auto& [song, m] : best) ranked.push_back(m);
  std::sort(ranked.begin(), ranked.end(), [](const PeakMatch& a, const PeakMatch& b) {
    return a.votes != b.votes ? a.votes > b.votes : a.song_id < b.song_id;
  });
  return ranked;
}

void PeakIndex::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  io::WriteMagic(out, "AFPH");
  io::WriteLE<uint16_t>(out, kPeakIndexVersion);
  io::WriteLE<uint64_t>(out, entries_.size());
  for (const Entry& e : entries_) {
    io::WriteLE(out, e.hash);
    io::WriteLE(out, e.song_id);
    io::WriteLE(out, e.anchor_frame);
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

PeakIndex PeakIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  io::ExpectMagic(in, "AFPH");
  const uint16_t version = io::ReadLE<uint16_t>(in);
  if (version != kPeakIndexVersion) {
    throw FormatError("unsupported peak index version " + std::to_string(version));
  }
  const uint64_t count = io::ReadLE<uint64_t>(in);
  in.seekg(0, std::ios::end);
  if (static_cast<uint64_t>(in.tellg()) != 14 + count * 12) {
    throw FormatError("peak index size does not match its header");
  }
  in.seekg(14);
  PeakIndex index;
  index.entries_.resize(count);
  for (Entry& e : index.entries_) {
    e.hash = io::ReadLE<uint32_t>(in);
    e.song_id = io::ReadLE<uint32_t>(in);
    e.anchor_frame = io::ReadLE<uint32_t>(in);
  }
  if (!std::is_sorted(index.entries_.begin(), index.entries_.end())) {
    throw FormatError("peak index entries are not sorted");
  }
  return index;
}

}  // namespace afp
