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

// Resampling, segmentation, energy gating and spectro-temporal features.

#ifndef AFP_DSP_FEATURES_H_
#define AFP_DSP_FEATURES_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp {

// Windowed-sinc polyphase resampler (Kaiser window, beta 8, 64 taps).
// The anti-alias cutoff sits below the output Nyquist so that content above
// it is suppressed by at least 40 dB. Same-rate input is returned unchanged.
AudioBuffer Resample(const AudioBuffer& audio, int target_hz);

// Number of 1 s / 0.5 s-hop windows in `num_samples` samples at `rate_hz`:
// floor((duration - 1) / 0.5) + 1, or 0 when shorter than one window.
size_t SegmentCount(size_t num_samples, int rate_hz);

// Start sample of window `index`.
size_t SegmentStart(size_t index, int rate_hz);

// Cuts `audio` into 1 s windows with 50% overlap. Throws InvalidArgument
// when the audio is shorter than one window.
std::vector<std::pair<size_t, AudioBuffer>> SegmentSong(
    const AudioBuffer& audio);

// 10 * log10(sum of squared samples); -infinity for an all-zero segment.
double SegmentEnergyDb(std::span<const float> segment);

// Database construction keeps a segment only if its energy exceeds this.
inline constexpr double kEnergyGateDb = 0.0;
inline bool PassesEnergyGate(std::span<const float> segment) {
  return SegmentEnergyDb(segment) > kEnergyGateDb;
}

// Row-major F x T real matrix: values[f * time_frames + t].
struct Spectrogram {
  size_t freq_bins = 0;
  size_t time_frames = 0;
  std::vector<double> values;
  // Center frequency of each row in Hz.
  std::vector<double> bin_hz;

  double at(size_t f, size_t t) const { return values[f * time_frames + t]; }
  double& at(size_t f, size_t t) { return values[f * time_frames + t]; }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;
};

// Log-mel front end of the learned encoder.
inline constexpr size_t kMelBins = 256;
inline constexpr size_t kMelFrames = 32;
inline constexpr size_t kMelFftSize = 1024;
inline constexpr size_t kMelHop = 250;
inline constexpr double kLogFloor = 1e-8;

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// kMelBins triangular filters spanning 0..4000 Hz over the kMelFftSize/2+1
// FFT bins, each scaled to unit area in Hz. Row-major, filters x fft bins.
const std::vector<double>& MelFilterbank();
// Center frequency of mel filter `bin` in Hz.
double MelBinCenterHz(size_t bin);

// Power mel spectrogram before the log, same layout as MelSpectrogram.
Spectrogram MelPowerSpectrogram(const AudioBuffer& segment);

// 256 x 32 matrix of log(mel power + 1e-8) for a 1 s, 8 kHz segment.
// Frames are centered at t * 250 samples with reflect padding. Throws
// InvalidArgument for the wrong rate or duration.
Spectrogram MelSpectrogram(const AudioBuffer& segment);

// Linear-frequency STFT magnitude in dB, used by the peak fingerprinter.
// Frame n covers samples [n * hop, n * hop + fft_size) with a Hann window;
// rows are FFT bins 0..fft_size/2. Silence maps to the -100 dB floor.
struct StftParams {
  size_t fft_size = 1024;
  size_t hop = 256;
};
Spectrogram StftMagnitudeDb(const AudioBuffer& audio,
                            const StftParams& params = {});

// Periodic Hann window of length n.
std::vector<double> HannWindow(size_t n);

}  // namespace afp

#endif  // AFP_DSP_FEATURES_H_
