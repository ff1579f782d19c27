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

// Evaluation protocols and reports.
//
// The simulated protocol concatenates level-normalized songs into one long
// recording, degrades it at one of three severities, and scores song
// accuracy of random in-song queries. The baseline protocol mixes test
// noise into excerpts at fixed SNRs and scores Top-1 hit rate. Both take the
// identification step as a closure so the learned and the peak pipelines
// run through identical code.

#ifndef AFP_EVALHARNESS_EVAL_H_
#define AFP_EVALHARNESS_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afp/augment/augment.h"
#include "afp/dsp/audio.h"
#include "afp/encoder/exchange.h"
#include "afp/peakfp/peakfp.h"
#include "afp/pqindex/pqindex.h"
#include "afp/retrieval/catalog.h"
#include "afp/retrieval/retrieval.h"

namespace afp {

enum class DistortionLevel { kLow, kMid, kHigh };

// low = 12 dB, mid = 6 dB, high = 0 dB.
double LevelSnrDb(DistortionLevel level);
std::string LevelName(DistortionLevel level);
// Throws InvalidArgument for anything but "low", "mid" or "high".
DistortionLevel ParseLevel(const std::string& name);

// Samples [start, end) of a recording belong to song_id.
struct SongSpan {
  uint32_t song_id = 0;
  size_t start = 0;
  size_t end = 0;

  double start_s() const { return static_cast<double>(start) / kSampleRateHz; }
  double end_s() const { return static_cast<double>(end) / kSampleRateHz; }
  friend bool operator==(const SongSpan&, const SongSpan&) = default;
};

struct ProtocolRecording {
  // Empty for the clean concert.
  std::optional<DistortionLevel> level;
  AudioBuffer audio;
  std::vector<SongSpan> boundaries;
};

inline constexpr double kConcertRms = 0.1;
inline constexpr double kMinConcertSongSeconds = 5.0;

// Scales every song to RMS 0.1 and concatenates them in order. Needs at
// least two songs of 5 s or more; a silent song throws InvalidArgument.
ProtocolRecording BuildConcert(std::span<const Song> songs);

// Microphone band limit applied before the room and the noise.
inline constexpr FilterSpec kMicHighPass{FilterKind::kHighPass, 300.0, 12};
inline constexpr FilterSpec kMicLowPass{FilterKind::kLowPass, 3200.0, 12};

// Band-limits the clean recording, convolves it with one pool IR and mixes
// one pool noise at the level's SNR. Every draw comes from `seed`.
ProtocolRecording SimulateRecording(const ProtocolRecording& clean,
                                    DistortionLevel level,
                                    const AugmentPools& pools, uint64_t seed);

// Signal-to-noise ratio of `degraded` against `reference` in dB.
double MeasuredSnrDb(const AudioBuffer& reference, const AudioBuffer& degraded);

// Power-weighted mean frequency of the whole signal in Hz.
double SpectralCentroidHz(const AudioBuffer& audio);

inline constexpr double kQueryLengthsS[] = {1, 2, 3, 4, 5, 10, 15};

struct EvalRow {
  std::string model_tag;
  std::string protocol;
  std::string level_or_snr;
  double query_len_s = 0.0;
  std::string index_config;
  std::string metric_name;
  double value = 0.0;
  size_t n_queries = 0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  // Serialized JSON snapshot of the run configuration.
  std::string config_json = "{}";

  // 64-bit FNV-1a of config_json, 16 lowercase hex digits.
  std::string config_hash() const;
  void Append(const EvalReport& other);

  // One header line, then one line per row; values printed with %.6f.
  std::string ToCsv() const;
  // {"config": ..., "config_hash": ..., "rows": [...]}
  std::string ToJson() const;
  void Write(const std::filesystem::path& csv_path,
             const std::filesystem::path& json_path) const;
};

std::string Fnv1aHex(const std::string& text);

// Song predicted for a query, or nullopt.
using SongIdentifier = std::function<std::optional<uint32_t>(const AudioBuffer&)>;

SongIdentifier LearnedIdentifier(const FingerprintIndex& index,
                                 const Embedder& embedder, size_t top_k = 4,
                                 size_t nprobe = 0);
SongIdentifier PeakIdentifier(const PeakIndex& index, const PeakConfig& config = {});

struct ProposedEvalConfig {
  std::string model_tag = "model";
  std::vector<double> query_lens_s = {1, 2, 3, 4, 5, 10, 15};
  size_t queries_per_len = 200;
  uint64_t seed = 0;
};

// Draws queries_per_len windows per length, each inside one song. Window
// positions depend only on (seed, length, ordinal), so recordings of the
// same concert at different levels are queried at the same places. Emits
// one song_accuracy row per length. Throws InvalidArgument when no song is
// long enough for a requested length.
EvalReport RunProposedEval(const ProtocolRecording& recording,
                           const SongIdentifier& identify,
                           const ProposedEvalConfig& config);

// Where a query was found: the song and the implied start of the query
// inside it. segment_top1 holds the nearest database segment of each 1 s
// query window, when the method has one.
struct Localization {
  std::optional<uint32_t> song;
  double start_s = 0.0;
  std::vector<std::optional<SegmentRef>> segment_top1;
};
using QueryLocator = std::function<Localization(const AudioBuffer&)>;

// Each window's top-1 neighbor implies a query start; the most common
// (song, start rounded to 0.5 s) pair wins, ties to the lower pair.
QueryLocator LearnedLocator(const FingerprintIndex& index,
                            const Embedder& embedder, size_t nprobe = 0);
// Start implied by the histogram-peak offset of the best match.
QueryLocator PeakLocator(const PeakIndex& index, const PeakConfig& config = {});

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct BaselineEvalConfig {
  std::string model_tag = "model";
  std::vector<double> snr_db = {0, 5, 10, 15};
  std::vector<double> query_lens_s = {1, 2, 3, 4, 5, 10, 15};
  size_t queries_per_len = 200;
  uint64_t seed = 0;
};

// Cuts random excerpts from `songs`, mixes one `noise` file at each SNR
// (kNoNoise leaves the excerpt clean) and locates them. Per (SNR, length)
// emits top1_hit_rate (song and start within 0.5 s), song_accuracy and,
// when the locator reports windows, segment_top1_hit_rate.
EvalReport RunBaselineEval(std::span<const Song> songs,
                           std::span<const AudioBuffer> noise,
                           const QueryLocator& locate,
                           const BaselineEvalConfig& config);

std::string SnrName(double snr_db);

struct SweepSize {
  size_t m = 0;
  size_t code_bits = 0;
  uint64_t serialized_bytes = 0;
};

struct SweepResult {
  EvalReport report;
  std::vector<SweepSize> sizes;

  // m,code_bits,serialized_bytes,metric_name,level_or_snr,query_len_s,value
  std::string PlotCsv() const;
};

// Rebuilds the index from `table` for every m (other fields from `base`)
// and runs `evaluate` on it. Rows are tagged index_config "m=<m>". Throws
// InvalidArgument when some m does not divide the embedding dimension.
SweepResult QuantizationSweep(
    const EmbeddingTable& table, const IndexConfig& base,
    std::span<const size_t> m_values,
    const std::function<EvalReport(const FingerprintIndex&)>& evaluate);

}  // namespace afp

#endif  // AFP_EVALHARNESS_EVAL_H_
