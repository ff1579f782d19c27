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

// Query-side retrieval: segment a query, embed each 1 s window, search the
// index and majority-vote a song. Also the segment-level Top-1 hit rule.

#ifndef AFP_RETRIEVAL_RETRIEVAL_H_
#define AFP_RETRIEVAL_RETRIEVAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afp/dsp/audio.h"
#include "afp/encoder/exchange.h"
#include "afp/encoder/model.h"
#include "afp/pqindex/pqindex.h"
#include "afp/retrieval/catalog.h"

namespace afp {

// Maps a 1 s, 8 kHz segment to a unit-norm embedding. Implementations must
// be safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual size_t dim() const = 0;
  virtual Embedding Embed(const AudioBuffer& segment) const = 0;
};

class EncoderEmbedder : public Embedder {
 public:
  explicit EncoderEmbedder(const Encoder& encoder) : encoder_(encoder) {}
  size_t dim() const override { return encoder_.config().embedding_dim; }
  Embedding Embed(const AudioBuffer& segment) const override {
    return encoder_.EmbedAudio(segment);
  }

 private:
  const Encoder& encoder_;
};

// Embeds every 1 s / 0.5 s-hop window of every song. With `energy_gate`
// windows at or below the 0 dB gate are skipped.
EmbeddingTable EmbedSongs(std::span<const Song> songs, const Embedder& embedder,
                          bool energy_gate = true);

// Trains an index on the table's rows and adds all of them.
FingerprintIndex BuildIndex(const EmbeddingTable& table, const IndexConfig& config);

struct QueryResult {
  std::optional<uint32_t> winner;
  std::map<uint32_t, uint32_t> votes;
  std::vector<std::vector<SearchHit>> per_segment;
  bool tie_broken = false;

  // {winner, votes, tie_broken, per_segment: [{segment, neighbors: [...]}]}
  std::string ToJson() const;
};

// Every neighbor votes for its song. The winner has the most votes; ties go
// to the smaller mean neighbor distance, then the lower song_id.
QueryResult VoteOnNeighbors(std::vector<std::vector<SearchHit>> per_segment);

// Throws InvalidArgument for a query shorter than 1 s or an empty index.
QueryResult Identify(const AudioBuffer& query, const FingerprintIndex& index,
                     const Embedder& embedder, size_t top_k = 4, size_t nprobe = 0);

inline constexpr double kHitToleranceS = 0.5;

struct HitJudgment {
  bool hit = false;
  SegmentRef predicted;
  uint32_t truth_song = 0;
  double truth_start_s = 0.0;
};

// Hit iff the song matches and |predicted.start_s() - truth_start_s| <= 0.5.
HitJudgment JudgeHit(const SegmentRef& predicted, uint32_t truth_song,
                     double truth_start_s);

// Judges the single nearest neighbor of a 1 s segment.
HitJudgment JudgeTop1(const AudioBuffer& segment, const FingerprintIndex& index,
                      const Embedder& embedder, uint32_t truth_song,
                      double truth_start_s, size_t nprobe = 0);

// 100 * hits / (hits + misses). Throws InvalidArgument on an empty set.
double Top1HitRate(std::span<const HitJudgment> judgments);

}  // namespace afp

#endif  // AFP_RETRIEVAL_RETRIEVAL_H_
