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

#include "afp/retrieval/retrieval.h"

#include <cmath>

#include "afp/common/error.h"
#include "afp/dsp/features.h"
#include "json.hpp"

namespace afp {

EmbeddingTable EmbedSongs(std::span<const Song> songs, const Embedder& embedder,
                          bool energy_gate) {
  EmbeddingTable table;
  table.dim = embedder.dim();
  for (const Song& song : songs) {
    const AudioBuffer audio = Resample(song.audio, kSampleRateHz);
    for (const auto& [index, segment] : SegmentSong(audio)) {
      if (energy_gate && !PassesEnergyGate(segment.samples)) continue;
      table.Append({song.id, static_cast<uint32_t>(index)}, embedder.Embed(segment));
    }
  }
  return table;
}

FingerprintIndex BuildIndex(const EmbeddingTable& table, const IndexConfig& config) {
  Require(table.dim == config.dim, "embedding dimension does not match the index");
  FingerprintIndex index(config);
  index.Train(table.values);
  for (size_t i = 0; i < table.rows(); ++i) index.Add(table.refs[i], table.row(i));
  return index;
}

QueryResult VoteOnNeighbors(std::vector<std::vector<SearchHit>> per_segment) {
  QueryResult r;
  std::map<uint32_t, double> distance_sum;
  for (const auto& hits : per_segment) {
    for (const SearchHit& h : hits) {
      ++r.votes[h.ref.song_id];
      distance_sum[h.ref.song_id] += h.distance;
    }
  }
  r.per_segment = std::move(per_segment);
  uint32_t best_votes = 0;
  for (const auto& [song, v] : r.votes) best_votes = std::max(best_votes, v);
  size_t tied = 0;
  double best_mean = 0.0;
  for (const auto& [song, v] : r.votes) {
    if (v != best_votes) continue;
    ++tied;
    const double mean = distance_sum[song] / v;
    // std::map iterates by ascending song_id, so strict < keeps the lower id.
    if (!r.winner || mean < best_mean) {
      r.winner = song;
      best_mean = mean;
    }
  }
  r.tie_broken = tied > 1;
  return r;
}

QueryResult Identify(const AudioBuffer& query, const FingerprintIndex& index,
                     const Embedder& embedder, size_t top_k, size_t nprobe) {
  Require(top_k >= 1, "top_k must be at least 1");
  const AudioBuffer audio = Resample(query, kSampleRateHz);
  Require(audio.duration_s() >= kSegmentSeconds, "query must be at least 1 s long");
  std::vector<std::vector<SearchHit>> per_segment;
  for (const auto& [i, segment] : SegmentSong(audio)) {
    per_segment.push_back(index.Search(embedder.Embed(segment), top_k, nprobe));
  }
  return VoteOnNeighbors(std::move(per_segment));
}

std::string QueryResult::ToJson() const {
  nlohmann::ordered_json j;
  j["winner"] = winner ? nlohmann::ordered_json(*winner) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& [song, count] : votes) v[std::to_string(song)] = count;
  j["votes"] = v;
  j["tie_broken"] = tie_broken;
  nlohmann::ordered_json segs = nlohmann::ordered_json::array();
  for (size_t s = 0; s < per_segment.size(); ++s) {
    nlohmann::ordered_json n = nlohmann::ordered_json::array();
    for (const SearchHit& h : per_segment[s]) {
      n.push_back({{"song_id", h.ref.song_id},
                   {"segment_index", h.ref.segment_index},
                   {"distance", h.distance}});
    }
    segs.push_back({{"segment", s}, {"neighbors", n}});
  }
  j["per_segment"] = segs;
  return j.dump();
}

HitJudgment JudgeHit(const SegmentRef& predicted, uint32_t truth_song,
                     double truth_start_s) {
  HitJudgment j;
  j.predicted = predicted;
  j.truth_song = truth_song;
  j.truth_start_s = truth_start_s;
  j.hit = predicted.song_id == truth_song &&
          std::fabs(predicted.start_s() - truth_start_s) <= kHitToleranceS + 1e-9;
  return j;
}

HitJudgment JudgeTop1(const AudioBuffer& segment, const FingerprintIndex& index,
                      const Embedder& embedder, uint32_t truth_song,
                      double truth_start_s, size_t nprobe) {
  const std::vector<SearchHit> hits = index.Search(embedder.Embed(segment), 1, nprobe);
  return JudgeHit(hits.front().ref, truth_song, truth_start_s);
}

double Top1HitRate(std::span<const HitJudgment> judgments) {
  Require(!judgments.empty(), "hit rate needs at least one judgment");
  size_t hits = 0;
  for (const HitJudgment& j : judgments) hits += j.hit;
  const size_t misses = judgments.size() - hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(hits + misses);
}

}  // namespace afp
