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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "afp/common/error.h"
#include "afp/common/rng.h"
#include "afp/corpus/synth.h"
#include "afp/evalharness/eval.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace afp {
namespace {

Song Tone(uint32_t id, double seconds, double amplitude) {
  const double hz = 300.0 + 200.0 * id;
  std::vector<float> s(static_cast<size_t>(seconds * kSampleRateHz));
  for (size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * hz * i / kSampleRateHz + 0.3));
  }
  return {id, {}, AudioBuffer(std::move(s), kSampleRateHz)};
}

// Tone id from zero crossings over 800 samples starting at `from`.
int ToneId(const AudioBuffer& a, size_t from) {
  int crossings = 0;
  for (size_t i = from + 1; i < from + 800; ++i) {
    if ((a.samples[i - 1] < 0) != (a.samples[i] < 0)) ++crossings;
  }
  const double hz = crossings / 2.0 / 0.1;
  return static_cast<int>(std::lround((hz - 300.0) / 200.0));
}

// Names the tone of a query, or nothing if its two ends disagree.
std::optional<uint32_t> ToneIdentifier(const AudioBuffer& q) {
  const int head = ToneId(q, 0);
  const int tail = ToneId(q, q.size() - 800);
  if (head != tail || head < 0) return std::nullopt;
  return static_cast<uint32_t>(head);
}

TEST(LevelTest, NamesAndSnr) {
  EXPECT_EQ(LevelSnrDb(DistortionLevel::kLow), 12.0);
  EXPECT_EQ(LevelSnrDb(DistortionLevel::kMid), 6.0);
  EXPECT_EQ(LevelSnrDb(DistortionLevel::kHigh), 0.0);
  for (auto l : {DistortionLevel::kLow, DistortionLevel::kMid, DistortionLevel::kHigh}) {
    EXPECT_EQ(ParseLevel(LevelName(l)), l);
  }
  EXPECT_THROW(ParseLevel("loud"), InvalidArgument);
}

TEST(ConcertTest, NormalizesAndRecordsBoundaries) {
  const std::vector<Song> songs = {Tone(0, 10, 0.05 * std::sqrt(2.0)),
                                   Tone(1, 10, 0.2 * std::sqrt(2.0))};
  const ProtocolRecording r = BuildConcert(songs);
  EXPECT_FALSE(r.level.has_value());
  ASSERT_EQ(r.audio.size(), 160000u);
  ASSERT_EQ(r.boundaries.size(), 2u);
  EXPECT_EQ(r.boundaries[0], (SongSpan{0, 0, 80000}));
  EXPECT_EQ(r.boundaries[1], (SongSpan{1, 80000, 160000}));
  EXPECT_DOUBLE_EQ(r.boundaries[1].end_s(), 20.0);
  const std::span<const float> all(r.audio.samples);
  EXPECT_NEAR(Rms(all.subspan(0, 80000)), 0.1, 1e-4);
  EXPECT_NEAR(Rms(all.subspan(80000)), 0.1, 1e-4);
}

TEST(ConcertTest, Rejections) {
  Song silent{1, {}, AudioBuffer(std::vector<float>(80000, 0.0f), kSampleRateHz)};
  EXPECT_THROW(BuildConcert(std::vector<Song>{Tone(0, 10, 0.1), silent}), InvalidArgument);
  EXPECT_THROW(BuildConcert(std::vector<Song>{Tone(0, 10, 0.1), Tone(1, 4, 0.1)}),
               InvalidArgument);
  EXPECT_THROW(BuildConcert(std::vector<Song>{Tone(0, 10, 0.1)}), InvalidArgument);
}

class SimulateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<Song> songs;
    for (uint32_t i = 0; i < 3; ++i) {
      songs.push_back({i, {}, corpus::SynthSong(corpus::RandomSongSpec(70 + i, 8.0))});
    }
    clean_ = BuildConcert(songs);
    pools_.noise = {corpus::SynthNoise(corpus::NoiseKind::kBroadband, 5.0, 1),
                    corpus::SynthNoise(corpus::NoiseKind::kBabble, 5.0, 2)};
    pools_.ir = {corpus::SynthIr(0.3, 3)};
  }
  ProtocolRecording clean_;
  AugmentPools pools_;
};

TEST_F(SimulateTest, SeverityOrdersSnr) {
  const ProtocolRecording low = SimulateRecording(clean_, DistortionLevel::kLow, pools_, 5);
  const ProtocolRecording mid = SimulateRecording(clean_, DistortionLevel::kMid, pools_, 5);
  const ProtocolRecording high = SimulateRecording(clean_, DistortionLevel::kHigh, pools_, 5);
  const double s_low = MeasuredSnrDb(clean_.audio, low.audio);
  const double s_mid = MeasuredSnrDb(clean_.audio, mid.audio);
  const double s_high = MeasuredSnrDb(clean_.audio, high.audio);
  EXPECT_GT(s_low, s_mid);
  EXPECT_GT(s_mid, s_high);
  EXPECT_EQ(high.level, DistortionLevel::kHigh);
  EXPECT_EQ(high.boundaries, clean_.boundaries);
  EXPECT_EQ(high.audio.size(), clean_.audio.size());
}

TEST_F(SimulateTest, DeterministicAndBandLimited) {
  const ProtocolRecording a = SimulateRecording(clean_, DistortionLevel::kMid, pools_, 9);
  EXPECT_EQ(a.audio, SimulateRecording(clean_, DistortionLevel::kMid, pools_, 9).audio);
  EXPECT_NE(a.audio, SimulateRecording(clean_, DistortionLevel::kMid, pools_, 10).audio);
  // Noise off isolates the band limit and the room.
  AugmentPools quiet = pools_;
  for (auto& n : quiet.noise) {
    for (auto& x : n.samples) x *= 1e-4f;
  }
  const ProtocolRecording low = SimulateRecording(clean_, DistortionLevel::kLow, quiet, 9);
  EXPECT_LT(SpectralCentroidHz(low.audio), SpectralCentroidHz(clean_.audio));
  EXPECT_THROW(SimulateRecording(clean_, DistortionLevel::kLow, AugmentPools{}, 1),
               InvalidArgument);
}

TEST(ReportTest, Fnv1aKnownValues) {
  EXPECT_EQ(Fnv1aHex(""), "cbf29ce484222325");
  EXPECT_EQ(Fnv1aHex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(Fnv1aHex("foobar"), "85944171f73967e8");
}

TEST(ReportTest, CsvAndJsonShape) {
  EvalReport r;
  r.config_json = R"({"seed":1})";
  r.rows.push_back({"ms", "proposed", "high", 5.0, "m=32", "song_accuracy", 62.5, 200});
  const std::string csv = r.ToCsv();
  EXPECT_EQ(csv,
            "model_tag,protocol,level_or_snr,query_len_s,index_config,metric_name,"
            "value,n_queries,config_hash\n"
            "ms,proposed,high,5.000000,m=32,song_accuracy,62.500000,200," +
                Fnv1aHex(r.config_json) + "\n");
  const auto j = nlohmann::json::parse(r.ToJson());
  EXPECT_EQ(j["config"]["seed"], 1);
  EXPECT_EQ(j["rows"][0]["n_queries"], 200);
  EXPECT_EQ(j["rows"][0]["config_hash"], r.config_hash());
  EvalReport other = r;
  other.config_json = R"({"seed":2})";
  EXPECT_NE(other.config_hash(), r.config_hash());
}

class ToneConcertTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<Song> songs;
    for (uint32_t i = 0; i < 5; ++i) songs.push_back(Tone(i, i == 2 ? 6.0 : 16.0, 0.3));
    concert_ = BuildConcert(songs);
  }
  ProtocolRecording concert_;
};

TEST_F(ToneConcertTest, QueriesStayInsideOneSong) {
  ProposedEvalConfig c;
  c.model_tag = "tone";
  c.query_lens_s = {1, 5, 10, 15};
  c.queries_per_len = 100;
  c.seed = 4;
  const EvalReport r = RunProposedEval(concert_, ToneIdentifier, c);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const EvalRow& row : r.rows) {
    EXPECT_EQ(row.value, 100.0) << row.query_len_s;
    EXPECT_EQ(row.n_queries, 100u);
    EXPECT_EQ(row.level_or_snr, "clean");
    EXPECT_EQ(row.metric_name, "song_accuracy");
  }
  EXPECT_EQ(r.ToCsv(), RunProposedEval(concert_, ToneIdentifier, c).ToCsv());
}

TEST_F(ToneConcertTest, CountsWrongAnswers) {
  ProposedEvalConfig c;
  c.query_lens_s = {2};
  c.queries_per_len = 400;
  const SongIdentifier only_zero = [](const AudioBuffer& q) -> std::optional<uint32_t> {
    if (ToneIdentifier(q) == 0u) return 0u;
    return 7u;
  };
  const EvalReport r = RunProposedEval(concert_, only_zero, c);
  // Song 0 is 16 of the 70 seconds but one of five equally likely songs.
  EXPECT_GT(r.rows[0].value, 12.0);
  EXPECT_LT(r.rows[0].value, 28.0);
}

TEST_F(ToneConcertTest, EdgeCases) {
  ProposedEvalConfig c;
  c.queries_per_len = 0;
  EXPECT_TRUE(RunProposedEval(concert_, ToneIdentifier, c).rows.empty());
  c.queries_per_len = 5;
  c.query_lens_s = {20};
  EXPECT_THROW(RunProposedEval(concert_, ToneIdentifier, c), InvalidArgument);
  c.query_lens_s = {0.5};
  EXPECT_THROW(RunProposedEval(concert_, ToneIdentifier, c), InvalidArgument);
}

class BaselineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    songs_ = new std::vector<Song>();
    peaks_ = new PeakIndex();
    for (uint32_t i = 0; i < 6; ++i) {
      songs_->push_back({10 + i, {}, corpus::SynthSong(corpus::RandomSongSpec(300 + i, 20.0))});
      peaks_->Add(10 + i, FingerprintAudio(songs_->back().audio));
    }
    noise_ = new std::vector<AudioBuffer>{
        corpus::SynthNoise(corpus::NoiseKind::kBabble, 10.0, 8)};
  }
  static void TearDownTestSuite() {
    delete songs_;
    delete peaks_;
    delete noise_;
  }
  static std::vector<Song>* songs_;
  static PeakIndex* peaks_;
  static std::vector<AudioBuffer>* noise_;
};
std::vector<Song>* BaselineTest::songs_ = nullptr;
PeakIndex* BaselineTest::peaks_ = nullptr;
std::vector<AudioBuffer>* BaselineTest::noise_ = nullptr;

TEST_F(BaselineTest, CleanPeakQueriesHitExactly) {
  BaselineEvalConfig c;
  c.model_tag = "peak";
  c.snr_db = {kNoNoise};
  c.query_lens_s = {3, 5};
  c.queries_per_len = 20;
  const EvalReport r = RunBaselineEval(*songs_, *noise_, PeakLocator(*peaks_), c);
  ASSERT_EQ(r.rows.size(), 4u);  // no per-window rows for the peak method
  for (const EvalRow& row : r.rows) {
    EXPECT_EQ(row.level_or_snr, "inf");
    EXPECT_EQ(row.value, 100.0) << row.metric_name;
  }
}

TEST_F(BaselineTest, HitRateBoundedByAccuracyAndDeterministic) {
  BaselineEvalConfig c;
  c.snr_db = {0, 10};
  c.query_lens_s = {2, 5};
  c.queries_per_len = 20;
  const EvalReport r = RunBaselineEval(*songs_, *noise_, PeakLocator(*peaks_), c);
  ASSERT_EQ(r.rows.size(), 8u);
  for (size_t i = 0; i < r.rows.size(); i += 2) {
    EXPECT_EQ(r.rows[i].metric_name, "top1_hit_rate");
    EXPECT_LE(r.rows[i].value, r.rows[i + 1].value);
  }
  EXPECT_EQ(r.ToJson(), RunBaselineEval(*songs_, *noise_, PeakLocator(*peaks_), c).ToJson());
  EXPECT_THROW(RunBaselineEval(*songs_, {}, PeakLocator(*peaks_), c), InvalidArgument);
}

TEST_F(BaselineTest, LearnedLocatorPoolsWindows) {
  Encoder encoder(EncoderConfig{}, 3);
  EncoderEmbedder embedder(encoder);
  IndexConfig ic;
  ic.coarse_cells = 4;
  ic.nprobe = 4;
  ic.code_bits = 5;
  const FingerprintIndex index = BuildIndex(EmbedSongs(*songs_, embedder), ic);
  const QueryLocator locate = LearnedLocator(index, embedder);
  const Localization loc = locate((*songs_)[3].audio.Slice(4000 * 9, 24000));
  EXPECT_EQ(loc.song, 13u);
  EXPECT_DOUBLE_EQ(loc.start_s, 4.5);
  ASSERT_EQ(loc.segment_top1.size(), 5u);
  EXPECT_EQ(loc.segment_top1[2], (SegmentRef{13, 11}));
}

EmbeddingTable RandomTable(size_t rows, size_t dim, uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable t;
  t.dim = dim;
  std::vector<float> v(dim);
  for (size_t r = 0; r < rows; ++r) {
    double norm = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(rng.Normal());
      norm += x * x;
    }
    for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
    t.Append({static_cast<uint32_t>(r / 50), static_cast<uint32_t>(r % 50)}, v);
  }
  return t;
}

TEST(SweepTest, RowsSizesAndCodeLengths) {
  const EmbeddingTable table = RandomTable(1200, 64, 2);
  IndexConfig base;
  base.coarse_cells = 8;
  base.nprobe = 8;
  const std::vector<size_t> ms = {4, 8, 16, 32};
  size_t calls = 0;
  const SweepResult r = QuantizationSweep(table, base, ms, [&](const FingerprintIndex& index) {
    ++calls;
    EvalReport rep;
    rep.rows.push_back({"t", "proposed", "high", 5.0, "", "song_accuracy",
                        static_cast<double>(index.config().subquantizers), 1});
    return rep;
  });
  EXPECT_EQ(calls, 4u);
  ASSERT_EQ(r.report.rows.size(), 4u);
  ASSERT_EQ(r.sizes.size(), 4u);
  for (size_t i = 0; i < ms.size(); ++i) {
    const size_t m = ms[i];
    EXPECT_EQ(r.report.rows[i].index_config, "m=" + std::to_string(m));
    EXPECT_EQ(r.sizes[i].code_bits, 8 * m);
    EXPECT_EQ(r.sizes[i].serialized_bytes,
              23u + 4u * 8 * 64 + 4u * 256 * 64 + 12u * 8 + 1200u * (8 + m));
  }
  const std::string plot = r.PlotCsv();
  EXPECT_EQ(std::count(plot.begin(), plot.end(), '\n'), 5);
  EXPECT_EQ(nlohmann::json::parse(r.report.config_json)["m_values"].size(), 4u);
}

TEST(SweepTest, RejectsIndivisibleM) {
  const EmbeddingTable table = RandomTable(1200, 64, 2);
  const auto eval = [](const FingerprintIndex&) { return EvalReport{}; };
  EXPECT_THROW(QuantizationSweep(table, IndexConfig{}, std::vector<size_t>{4, 128}, eval),
               InvalidArgument);
  EXPECT_THROW(QuantizationSweep(table, IndexConfig{}, std::vector<size_t>{3}, eval),
               InvalidArgument);
}

}  // namespace
}  // namespace afp
