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

#include "afp/evalharness/eval.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "afp/common/error.h"
#include "afp/common/fft.h"
#include "afp/common/rng.h"
#include "afp/dsp/features.h"
#include "json.hpp"

namespace afp {
namespace {

using nlohmann::json;

size_t Samples(double seconds) {
  return static_cast<size_t>(std::llround(seconds * kSampleRateHz));
}

uint64_t LengthOrdinal(double seconds) {
  return static_cast<uint64_t>(std::llround(seconds * 1000.0));
}

// Seed of query `q` of length `len_s`; shared by every level and SNR.
uint64_t QuerySeed(uint64_t seed, double len_s, size_t q) {
  return DeriveSeed(DeriveSeed(seed, LengthOrdinal(len_s)), q);
}

void CheckLengths(const std::vector<double>& lens) {
  for (double len : lens) {
    Require(std::isfinite(len) && len >= kSegmentSeconds,
            "query length must be at least 1 s");
  }
}

std::string FormatValue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double Percent(size_t count, size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

bool WithinTolerance(double a, double b) {
  return std::fabs(a - b) <= kHitToleranceS + 1e-9;
}

}  // namespace

double LevelSnrDb(DistortionLevel level) {
  switch (level) {
    case DistortionLevel::kLow: return 12.0;
    case DistortionLevel::kMid: return 6.0;
    case DistortionLevel::kHigh: return 0.0;
  }
  throw InvalidArgument("unknown distortion level");
}

std::string LevelName(DistortionLevel level) {
  switch (level) {
    case DistortionLevel::kLow: return "low";
    case DistortionLevel::kMid: return "mid";
    case DistortionLevel::kHigh: return "high";
  }
  throw InvalidArgument("unknown distortion level");
}

DistortionLevel ParseLevel(const std::string& name) {
  if (name == "low") return DistortionLevel::kLow;
  if (name == "mid") return DistortionLevel::kMid;
  if (name == "high") return DistortionLevel::kHigh;
  throw InvalidArgument("unknown distortion level '" + name + "'");
}

ProtocolRecording BuildConcert(std::span<const Song> songs) {
  Require(songs.size() >= 2, "a concert needs at least two songs");
  ProtocolRecording out;
  for (const Song& song : songs) {
    Require(song.audio.sample_rate_hz == kSampleRateHz, "concert songs must be 8 kHz");
    Require(song.audio.duration_s() >= kMinConcertSongSeconds,
            "song " + std::to_string(song.id) + " is shorter than 5 s");
    const double rms = Rms(song.audio.samples);
    Require(rms > 0.0, "song " + std::to_string(song.id) + " is silent");
    const double gain = kConcertRms / rms;
    const size_t start = out.audio.samples.size();
    for (float x : song.audio.samples) {
      out.audio.samples.push_back(static_cast<float>(x * gain));
    }
    out.boundaries.push_back({song.id, start, out.audio.samples.size()});
  }
  return out;
}

ProtocolRecording SimulateRecording(const ProtocolRecording& clean,
                                    DistortionLevel level,
                                    const AugmentPools& pools, uint64_t seed) {
  Require(!pools.noise.empty(), "noise pool is empty");
  Require(!pools.ir.empty(), "impulse response pool is empty");
  Require(!clean.audio.empty(), "recording is empty");
  Rng rng(seed);
  const AudioBuffer& ir = pools.ir[rng.UniformInt(pools.ir.size())];
  const AudioBuffer& noise = pools.noise[rng.UniformInt(pools.noise.size())];
  const size_t noise_offset = rng.UniformInt(noise.size());

  AudioBuffer y = ApplyFilter(ApplyFilter(clean.audio, kMicHighPass), kMicLowPass);
  y = ConvolveIr(y, ir);
  ProtocolRecording out;
  out.level = level;
  out.audio = MixAtSnr(y, noise, LevelSnrDb(level), noise_offset);
  out.boundaries = clean.boundaries;
  return out;
}

double MeasuredSnrDb(const AudioBuffer& reference, const AudioBuffer& degraded) {
  Require(reference.size() == degraded.size() && !reference.empty(),
          "SNR needs equal, non-empty signals");
  double signal = 0.0;
  double noise = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double r = reference.samples[i];
    const double e = degraded.samples[i] - r;
    signal += r * r;
    noise += e * e;
  }
  return 10.0 * std::log10(signal / noise);
}

double SpectralCentroidHz(const AudioBuffer& audio) {
  constexpr size_t kFrame = 1024;
  Require(audio.size() >= kFrame, "centroid needs at least 1024 samples");
  const std::vector<double> window = HannWindow(kFrame);
  std::vector<double> total(kFrame / 2 + 1, 0.0);
  std::vector<double> frame(kFrame);
  for (size_t start = 0; start + kFrame <= audio.size(); start += kFrame) {
    for (size_t i = 0; i < kFrame; ++i) frame[i] = audio.samples[start + i] * window[i];
    const std::vector<double> p = PowerSpectrum(frame);
    for (size_t k = 0; k < p.size(); ++k) total[k] += p[k];
  }
  double num = 0.0;
  double den = 0.0;
  for (size_t k = 0; k < total.size(); ++k) {
    const double hz = static_cast<double>(k) * audio.sample_rate_hz / kFrame;
    num += hz * total[k];
    den += total[k];
  }
  Require(den > 0.0, "centroid of a silent signal");
  return num / den;
}

std::string Fnv1aHex(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string EvalReport::config_hash() const { return Fnv1aHex(config_json); }

void EvalReport::Append(const EvalReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string EvalReport::ToCsv() const {
  const std::string hash = config_hash();
  std::string out =
      "model_tag,protocol,level_or_snr,query_len_s,index_config,metric_name,"
      "value,n_queries,config_hash\n";
  for (const EvalRow& r : rows) {
    out += r.model_tag + "," + r.protocol + "," + r.level_or_snr + "," +
           FormatValue(r.query_len_s) + "," + r.index_config + "," +
           r.metric_name + "," + FormatValue(r.value) + "," +
           std::to_string(r.n_queries) + "," + hash + "\n";
  }
  return out;
}

std::string EvalReport::ToJson() const {
  json doc;
  doc["config"] = json::parse(config_json);
  doc["config_hash"] = config_hash();
  doc["rows"] = json::array();
  for (const EvalRow& r : rows) {
    doc["rows"].push_back({{"model_tag", r.model_tag},
                           {"protocol", r.protocol},
                           {"level_or_snr", r.level_or_snr},
                           {"query_len_s", r.query_len_s},
                           {"index_config", r.index_config},
                           {"metric_name", r.metric_name},
                           {"value", r.value},
                           {"n_queries", r.n_queries},
                           {"config_hash", config_hash()}});
  }
  return doc.dump(2) + "\n";
}

void EvalReport::Write(const std::filesystem::path& csv_path,
                       const std::filesystem::path& json_path) const {
  for (const auto& [path, text] : {std::pair{csv_path, ToCsv()}, std::pair{json_path, ToJson()}}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
  }
}

SongIdentifier LearnedIdentifier(const FingerprintIndex& index,
                                 const Embedder& embedder, size_t top_k,
                                 size_t nprobe) {
  return [&index, &embedder, top_k, nprobe](const AudioBuffer& query) {
    return Identify(query, index, embedder, top_k, nprobe).winner;
  };
}

SongIdentifier PeakIdentifier(const PeakIndex& index, const PeakConfig& config) {
  return [&index, config](const AudioBuffer& query) -> std::optional<uint32_t> {
    const std::vector<PeakMatch> matches = index.Match(FingerprintAudio(query, config));
    if (matches.empty()) return std::nullopt;
    return matches.front().song_id;
  };
}

EvalReport RunProposedEval(const ProtocolRecording& recording,
                           const SongIdentifier& identify,
                           const ProposedEvalConfig& config) {
  CheckLengths(config.query_lens_s);
  const std::string level = recording.level ? LevelName(*recording.level) : "clean";
  EvalReport report;
  report.config_json = json{{"protocol", "proposed"},
                            {"model_tag", config.model_tag},
                            {"level", level},
                            {"query_lens_s", config.query_lens_s},
                            {"queries_per_len", config.queries_per_len},
                            {"seed", config.seed}}
                           .dump();
  if (config.queries_per_len == 0) return report;

  for (double len_s : config.query_lens_s) {
    const size_t len = Samples(len_s);
    Require(len < recording.audio.size(), "recording is shorter than the query length");
    std::vector<const SongSpan*> eligible;
    for (const SongSpan& span : recording.boundaries) {
      Require(span.start <= span.end && span.end <= recording.audio.size(),
              "song boundary outside the recording");
      if (span.end - span.start >= len) eligible.push_back(&span);
    }
    Require(!eligible.empty(), "no song is long enough for a " +
                                   FormatValue(len_s) + " s query");
    size_t correct = 0;
    for (size_t q = 0; q < config.queries_per_len; ++q) {
      Rng rng(QuerySeed(config.seed, len_s, q));
      const SongSpan& span = *eligible[rng.UniformInt(eligible.size())];
      const size_t start = span.start + rng.UniformInt(span.end - span.start - len + 1);
      const std::optional<uint32_t> winner = identify(recording.audio.Slice(start, len));
      if (winner == span.song_id) ++correct;
    }
    report.rows.push_back({config.model_tag, "proposed", level, len_s, "",
                           "song_accuracy", Percent(correct, config.queries_per_len),
                           config.queries_per_len});
  }
  return report;
}

QueryLocator LearnedLocator(const FingerprintIndex& index,
                            const Embedder& embedder, size_t nprobe) {
  return [&index, &embedder, nprobe](const AudioBuffer& query) {
    Localization out;
    std::map<std::pair<uint32_t, int64_t>, size_t> votes;
    for (const auto& [start, segment] : SegmentSong(query)) {
      const std::vector<SearchHit> hits =
          index.Search(embedder.Embed(segment), 1, nprobe);
      if (hits.empty()) {
        out.segment_top1.push_back(std::nullopt);
        continue;
      }
      const SegmentRef ref = hits.front().ref;
      out.segment_top1.push_back(ref);
      const double implied = ref.start_s() - static_cast<double>(start) / kSampleRateHz;
      ++votes[{ref.song_id, std::llround(implied / kSegmentHopSeconds)}];
    }
    size_t best = 0;
    for (const auto& [key, count] : votes) {
      if (count > best) {
        best = count;
        out.song = key.first;
        out.start_s = static_cast<double>(key.second) * kSegmentHopSeconds;
      }
    }
    return out;
  };
}

QueryLocator PeakLocator(const PeakIndex& index, const PeakConfig& config) {
  return [&index, config](const AudioBuffer& query) {
    Localization out;
    const std::vector<PeakMatch> matches = index.Match(FingerprintAudio(query, config));
    if (!matches.empty()) {
      out.song = matches.front().song_id;
      out.start_s = static_cast<double>(matches.front().best_offset) *
                    static_cast<double>(config.stft.hop) / kSampleRateHz;
    }
    return out;
  };
}

std::string SnrName(double snr_db) {
  if (snr_db == kNoNoise) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr_db);
  return buf;
}

EvalReport RunBaselineEval(std::span<const Song> songs,
                           std::span<const AudioBuffer> noise,
                           const QueryLocator& locate,
                           const BaselineEvalConfig& config) {
  CheckLengths(config.query_lens_s);
  Require(!songs.empty(), "baseline evaluation needs songs");
  json snrs = json::array();
  for (double snr : config.snr_db) {
    Require(!std::isnan(snr), "SNR must be a number");
    if (snr != kNoNoise) Require(!noise.empty(), "noise pool is empty");
    snrs.push_back(SnrName(snr));
  }
  EvalReport report;
  report.config_json = json{{"protocol", "baseline"},
                            {"model_tag", config.model_tag},
                            {"snr_db", snrs},
                            {"query_lens_s", config.query_lens_s},
                            {"queries_per_len", config.queries_per_len},
                            {"seed", config.seed}}
                           .dump();
  if (config.queries_per_len == 0) return report;

  for (double snr : config.snr_db) {
    for (double len_s : config.query_lens_s) {
      const size_t len = Samples(len_s);
      std::vector<const Song*> eligible;
      for (const Song& song : songs) {
        Require(song.audio.sample_rate_hz == kSampleRateHz, "test songs must be 8 kHz");
        if (song.audio.size() >= len) eligible.push_back(&song);
      }
      Require(!eligible.empty(), "no song is long enough for a " +
                                     FormatValue(len_s) + " s query");
      size_t hits = 0;
      size_t correct = 0;
      size_t segment_hits = 0;
      size_t segments = 0;
      for (size_t q = 0; q < config.queries_per_len; ++q) {
        Rng rng(QuerySeed(config.seed, len_s, q));
        const Song& song = *eligible[rng.UniformInt(eligible.size())];
        const size_t start = rng.UniformInt(song.audio.size() - len + 1);
        AudioBuffer query = song.audio.Slice(start, len);
        if (snr != kNoNoise) {
          const AudioBuffer& n = noise[rng.UniformInt(noise.size())];
          query = MixAtSnr(query, n, snr, static_cast<size_t>(rng.UniformInt(n.size())));
        }
        const double truth_s = static_cast<double>(start) / kSampleRateHz;
        const Localization loc = locate(query);
        if (loc.song == song.id) {
          ++correct;
          if (WithinTolerance(loc.start_s, truth_s)) ++hits;
        }
        for (size_t k = 0; k < loc.segment_top1.size(); ++k) {
          ++segments;
          const auto& ref = loc.segment_top1[k];
          if (ref && JudgeHit(*ref, song.id, truth_s + k * kSegmentHopSeconds).hit) {
            ++segment_hits;
          }
        }
      }
      const size_t n = config.queries_per_len;
      const std::string name = SnrName(snr);
      report.rows.push_back({config.model_tag, "baseline", name, len_s, "",
                             "top1_hit_rate", Percent(hits, n), n});
      report.rows.push_back({config.model_tag, "baseline", name, len_s, "",
                             "song_accuracy", Percent(correct, n), n});
      if (segments > 0) {
        report.rows.push_back({config.model_tag, "baseline", name, len_s, "",
                               "segment_top1_hit_rate",
                               Percent(segment_hits, segments), segments});
      }
    }
  }
  return report;
}

std::string SweepResult::PlotCsv() const {
  std::map<std::string, const SweepSize*> by_tag;
  for (const SweepSize& s : sizes) by_tag["m=" + std::to_string(s.m)] = &s;
  std::string out = "m,code_bits,serialized_bytes,metric_name,level_or_snr,query_len_s,value\n";
  for (const EvalRow& r : report.rows) {
    const auto it = by_tag.find(r.index_config);
    if (it == by_tag.end()) continue;
    const SweepSize& s = *it->second;
    out += std::to_string(s.m) + "," + std::to_string(s.code_bits) + "," +
           std::to_string(s.serialized_bytes) + "," + r.metric_name + "," +
           r.level_or_snr + "," + FormatValue(r.query_len_s) + "," +
           FormatValue(r.value) + "\n";
  }
  return out;
}

SweepResult QuantizationSweep(
    const EmbeddingTable& table, const IndexConfig& base,
    std::span<const size_t> m_values,
    const std::function<EvalReport(const FingerprintIndex&)>& evaluate) {
  Require(!m_values.empty(), "no quantizer counts to sweep");
  for (size_t m : m_values) {
    Require(m > 0 && table.dim % m == 0,
            "m = " + std::to_string(m) + " does not divide the embedding dimension " +
                std::to_string(table.dim));
  }
  SweepResult result;
  json ms = json::array();
  for (size_t m : m_values) ms.push_back(m);
  std::string inner = "{}";
  for (size_t m : m_values) {
    IndexConfig config = base;
    config.dim = table.dim;
    config.subquantizers = m;
    const FingerprintIndex index = BuildIndex(table, config);
    EvalReport rep = evaluate(index);
    if (inner == "{}") inner = rep.config_json;
    for (EvalRow& row : rep.rows) row.index_config = "m=" + std::to_string(m);
    result.report.Append(rep);
    result.sizes.push_back({m, m * config.code_bits, index.SerializedSize()});
  }
  result.report.config_json = json{{"protocol", "pq_sweep"},
                                   {"m_values", ms},
                                   {"code_bits", base.code_bits},
                                   {"coarse_cells", base.coarse_cells},
                                   {"nprobe", base.nprobe},
                                   {"index_seed", base.seed},
                                   {"eval", json::parse(inner)}}
                                  .dump();
  return result;
}

}  // namespace afp
