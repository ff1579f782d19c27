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

#ifndef AFP_DSP_AUDIO_H_
#define AFP_DSP_AUDIO_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace afp {

// Working sample rate of the whole fingerprinting pipeline.
inline constexpr int kSampleRateHz = 8000;
// Fingerprint analysis window and hop.
inline constexpr double kSegmentSeconds = 1.0;
inline constexpr double kSegmentHopSeconds = 0.5;

// Mono signal with nominal amplitude range [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate_hz = kSampleRateHz;

  AudioBuffer() = default;
  AudioBuffer(std::vector<float> s, int rate)
      : samples(std::move(s)), sample_rate_hz(rate) {}

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  // Copy of samples [start, start + length).
  AudioBuffer Slice(size_t start, size_t length) const;

  // Throws InvalidArgument unless sample_rate_hz > 0 and every sample is
  // finite.
  void Validate() const;

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

// Root mean square and peak absolute amplitude.
double Rms(std::span<const float> samples);
double Peak(std::span<const float> samples);
double MeanPower(std::span<const float> samples);

// Position of a 1 s fingerprint window inside a song; the window starts at
// segment_index * 0.5 s.
struct SegmentRef {
  uint32_t song_id = 0;
  uint32_t segment_index = 0;

  double start_s() const { return segment_index * kSegmentHopSeconds; }

  friend auto operator<=>(const SegmentRef&, const SegmentRef&) = default;
};

}  // namespace afp

#endif  // AFP_DSP_AUDIO_H_
