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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <vector>

#include "afp/augment/augment.h"
#include "afp/common/error.h"
#include "afp/common/rng.h"
#include "afp/corpus/synth.h"
#include "afp/peakfp/peakfp.h"
#include "gtest/gtest.h"

namespace afp {
namespace {

Spectrogram Constant(size_t bins, size_t frames, double v) {
  Spectrogram s;
  s.freq_bins = bins;
  s.time_frames = frames;
  s.values.assign(bins * frames, v);
  return s;
}

TEST(ExtractPeaksTest, ConstantSpectrogramHasNoPeaks) {
  EXPECT_TRUE(ExtractPeaks(Constant(64, 40, -20.0)).empty());
}

TEST(ExtractPeaksTest, SingleCell) {
  Spectrogram s = Constant(64, 40, -100.0);
  s.at(17, 23) = 0.0;
  const std::vector<SpectralPeak> peaks = ExtractPeaks(s);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].bin, 17u);
  EXPECT_EQ(peaks[0].frame, 23u);
}

TEST(ExtractPeaksTest, MedianThreshold) {
  Spectrogram s = Constant(64, 40, -50.0);
  s.at(10, 10) = -40.5;  // 9.5 dB above the frame median
  s.at(40, 30) = -39.5;  // 10.5 dB
  const std::vector<SpectralPeak> peaks = ExtractPeaks(s);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_EQ(peaks[0].bin, 40u);
}

TEST(ExtractPeaksTest, DualToneRows) {
  // 1 kHz and 3 kHz land on bins 128 and 384 of a 1024-point FFT at 8 kHz.
  AudioBuffer a;
  a.samples.resize(8000 * 6);
  for (size_t i = 0; i < a.size(); ++i) {
    const double t = i / 8000.0;
    const double am = 1.0 + 0.5 * std::sin(2 * std::numbers::pi * 0.7 * t);
    a.samples[i] = static_cast<float>(
        0.3 * am * (std::cos(2 * std::numbers::pi * 1000 * t) +
                    std::cos(2 * std::numbers::pi * 3000 * t)));
  }
  const std::vector<SpectralPeak> peaks = ExtractPeaks(StftMagnitudeDb(a));
  ASSERT_FALSE(peaks.empty());
  std::set<uint32_t> rows;
  for (const SpectralPeak& p : peaks) {
    EXPECT_TRUE(p.bin == 128 || p.bin == 384) << p.bin;
    rows.insert(p.bin);
  }
  EXPECT_EQ(rows.size(), 2u);
}

TEST(ExtractPeaksTest, TimeShiftByOneHop) {
  const AudioBuffer song = corpus::SynthSong(corpus::RandomSongSpec(3, 12.0));
  const AudioBuffer a = song.Slice(256 * 10, 256 * 300);
  const AudioBuffer b = song.Slice(256 * 9, 256 * 301);
  const auto pa = ExtractPeaks(StftMagnitudeDb(a));
  const auto pb = ExtractPeaks(StftMagnitudeDb(b));
  const uint32_t frames = StftMagnitudeDb(a).time_frames;
  std::set<std::pair<uint32_t, uint32_t>> sa, sb;
  for (const auto& p : pa) {
    if (p.frame >= 8 && p.frame + 8 < frames) sa.insert({p.frame + 1, p.bin});
  }
  for (const auto& p : pb) {
    if (p.frame >= 9 && p.frame + 8 < frames + 1) sb.insert({p.frame, p.bin});
  }
  EXPECT_GT(sa.size(), 50u);
  EXPECT_EQ(sa, sb);
}

TEST(HashTest, BitPacking) {
  EXPECT_EQ(PackHash(100, 200, 50), 420249650u);
  Rng rng(1);
  std::set<uint32_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const uint32_t k0 = rng.UniformInt(1024), k1 = rng.UniformInt(1024);
    const uint32_t dn = 1 + rng.UniformInt(4095);
    uint32_t a, b, c;
    UnpackHash(PackHash(k0, k1, dn), &a, &b, &c);
    EXPECT_EQ(a, k0);
    EXPECT_EQ(b, k1);
    EXPECT_EQ(c, dn);
  }
  EXPECT_THROW(PackHash(1024, 0, 1), InvalidArgument);
  EXPECT_THROW(PackHash(0, 0, 0), InvalidArgument);
}

TEST(HashTest, SinglePeakHasNoLandmarks) {
  EXPECT_TRUE(HashLandmarks({{5, 5}}).empty());
}

TEST(HashTest, FanOutCount) {
  PeakConfig cfg;
  cfg.fan_out = 3;
  for (size_t n : {1u, 2u, 3u, 4u, 9u}) {
    std::vector<SpectralPeak> peaks;
    for (uint32_t i = 0; i < n; ++i) peaks.push_back({50 + i, 10 * i});
    size_t expected = 0;
    for (size_t i = 0; i < n; ++i) expected += std::min<size_t>(3, n - 1 - i);
    EXPECT_EQ(HashLandmarks(peaks, cfg).size(), expected) << n;
  }
}

TEST(HashTest, TargetZone) {
  // Same frame, too far in frequency, too far in time; (120, 150) -> (90, 201)
  // is in zone.
  const std::vector<SpectralPeak> peaks = {{100, 0}, {101, 0}, {400, 5}, {120, 150}, {90, 201}};
  const std::vector<Landmark> l = HashLandmarks(peaks);
  std::vector<Landmark> expected = {{PackHash(100, 120, 150), 0},
                                    {PackHash(101, 120, 150), 0},
                                    {PackHash(120, 90, 51), 150}};
  EXPECT_EQ(l, expected);
}

class PeakIndexTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    songs_ = new std::vector<AudioBuffer>();
    index_ = new PeakIndex();
    for (uint32_t i = 0; i < 12; ++i) {
      songs_->push_back(corpus::SynthSong(corpus::RandomSongSpec(700 + i, 30.0)));
      index_->Add(i, FingerprintAudio(songs_->back()));
    }
  }
  static void TearDownTestSuite() {
    delete songs_;
    delete index_;
  }
  static std::vector<AudioBuffer>* songs_;
  static PeakIndex* index_;
};
std::vector<AudioBuffer>* PeakIndexTest::songs_ = nullptr;
PeakIndex* PeakIndexTest::index_ = nullptr;

TEST_F(PeakIndexTest, EntriesSorted) {
  EXPECT_TRUE(std::is_sorted(index_->entries().begin(), index_->entries().end()));
}

TEST_F(PeakIndexTest, CleanExcerptSelfMatch) {
  for (uint32_t song : {0u, 5u, 11u}) {
    for (uint32_t frame : {0u, 100u, 517u}) {
      for (double seconds : {3.0, 5.0}) {
        const AudioBuffer q = (*songs_)[song].Slice(frame * 256, static_cast<size_t>(seconds * 8000));
        const std::vector<PeakMatch> m = index_->Match(FingerprintAudio(q));
        ASSERT_FALSE(m.empty());
        EXPECT_EQ(m[0].song_id, song);
        EXPECT_EQ(m[0].best_offset, frame);
      }
    }
  }
}

TEST_F(PeakIndexTest, SilenceIsNoMatch) {
  AudioBuffer silence;
  silence.samples.assign(5 * 8000, 0.0f);
  EXPECT_TRUE(FingerprintAudio(silence).empty());
  EXPECT_TRUE(index_->Match(FingerprintAudio(silence)).empty());
}

TEST_F(PeakIndexTest, NoisyQueriesAndMonotoneVotes) {
  const AudioBuffer noise = corpus::SynthNoise(corpus::NoiseKind::kBroadband, 20.0, 9);
  const double snrs[] = {20.0, 10.0, 5.0, 0.0};
  double votes[4] = {0, 0, 0, 0};
  int correct10 = 0;
  for (uint32_t song = 0; song < 12; ++song) {
    const AudioBuffer q = (*songs_)[song].Slice(8000 * 12, 8000 * 10);
    for (int s = 0; s < 4; ++s) {
      const auto m = index_->Match(FingerprintAudio(MixAtSnr(q, noise, snrs[s], 0)));
      for (const PeakMatch& x : m) {
        if (x.song_id == song) votes[s] += x.votes;
      }
      if (s == 1 && !m.empty() && m[0].song_id == song) ++correct10;
    }
  }
  EXPECT_GE(correct10, 11);
  for (int s = 1; s < 4; ++s) EXPECT_LE(votes[s], votes[s - 1]) << snrs[s];
}

TEST_F(PeakIndexTest, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "afp_peak_index.afph";
  index_->Save(path);
  EXPECT_EQ(std::filesystem::file_size(path), 14 + 12 * index_->size());
  const PeakIndex back = PeakIndex::Load(path);
  EXPECT_EQ(back.entries(), index_->entries());
  std::filesystem::resize_file(path, 20);
  EXPECT_THROW(PeakIndex::Load(path), FormatError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace afp
