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

#include "afp/dsp/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "afp/common/error.h"
#include "afp/common/fft.h"

namespace afp {

namespace {

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 8.0;
// Cutoff as a fraction of the lower Nyquist frequency; places the end of the
// Kaiser transition band at that Nyquist.
constexpr double kCutoffFraction = 0.92;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double Kaiser(double x, double beta) {
  // x in [-1, 1].
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) /
         std::cyl_bessel_i(0.0, beta);
}

}  // namespace

AudioBuffer Resample(const AudioBuffer& audio, int target_hz) {
  Require(target_hz > 0, "target sample rate must be positive");
  Require(audio.sample_rate_hz > 0, "source sample rate must be positive");
  if (target_hz == audio.sample_rate_hz) return audio;

  const int64_t g = std::gcd(audio.sample_rate_hz, target_hz);
  const int64_t up = target_hz / g;
  const int64_t down = audio.sample_rate_hz / g;
  const double ratio = static_cast<double>(target_hz) / audio.sample_rate_hz;
  const double scale = std::min(1.0, ratio);
  // Filter support spans kResampleTaps samples at the lower of the two rates.
  const double half_width = 0.5 * kResampleTaps / scale;
  const int64_t taps = 2 * static_cast<int64_t>(std::ceil(half_width));
  const double cutoff = kCutoffFraction * scale;

  // Phase p interpolates at input position i + p / up.
  std::vector<double> table(static_cast<size_t>(up * taps));
  for (int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    double sum = 0.0;
    for (int64_t k = 0; k < taps; ++k) {
      const double tau = static_cast<double>(k - taps / 2 + 1) - frac;
      const double w =
          cutoff * Sinc(cutoff * tau) * Kaiser(tau / half_width, kKaiserBeta);
      table[static_cast<size_t>(p * taps + k)] = w;
      sum += w;
    }
    for (int64_t k = 0; k < taps; ++k) table[static_cast<size_t>(p * taps + k)] /= sum;
  }

  const auto n_in = static_cast<int64_t>(audio.size());
  const int64_t n_out = (n_in * up + down / 2) / down;
  std::vector<float> out(static_cast<size_t>(n_out));
  for (int64_t n = 0; n < n_out; ++n) {
    const int64_t pos = n * down;
    const int64_t base = pos / up;
    const int64_t phase = pos % up;
    const double* h = &table[static_cast<size_t>(phase * taps)];
    double acc = 0.0;
    for (int64_t k = 0; k < taps; ++k) {
      const int64_t idx = base + k - taps / 2 + 1;
      if (idx < 0 || idx >= n_in) continue;
      acc += h[k] * audio.samples[static_cast<size_t>(idx)];
    }
    out[static_cast<size_t>(n)] = static_cast<float>(acc);
  }
  return AudioBuffer(std::move(out), target_hz);
}

size_t SegmentCount(size_t num_samples, int rate_hz) {
  const auto window = static_cast<size_t>(rate_hz);
  const auto hop = static_cast<size_t>(rate_hz / 2);
  if (num_samples < window) return 0;
  return (num_samples - window) / hop + 1;
}

size_t SegmentStart(size_t index, int rate_hz) {
  return index * static_cast<size_t>(rate_hz / 2);
}

std::vector<std::pair<size_t, AudioBuffer>> SegmentSong(
    const AudioBuffer& audio) {
  const size_t count = SegmentCount(audio.size(), audio.sample_rate_hz);
  Require(count > 0, "audio shorter than one 1 s window");
  std::vector<std::pair<size_t, AudioBuffer>> out;
  out.reserve(count);
  const auto window = static_cast<size_t>(audio.sample_rate_hz);
  for (size_t i = 0; i < count; ++i) {
    out.emplace_back(i, audio.Slice(SegmentStart(i, audio.sample_rate_hz),
                                    window));
  }
  return out;
}

double SegmentEnergyDb(std::span<const float> segment) {
  double energy = 0.0;
  for (float s : segment) energy += static_cast<double>(s) * s;
  if (energy == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(energy);
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> HannWindow(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

double MelBinCenterHz(size_t bin) {
  const double top = HzToMel(kSampleRateHz / 2.0);
  return MelToHz(top * static_cast<double>(bin + 1) /
                 static_cast<double>(kMelBins + 1));
}

const std::vector<double>& MelFilterbank() {
  static const std::vector<double> bank = [] {
    constexpr size_t kFftBins = kMelFftSize / 2 + 1;
    const double top = HzToMel(kSampleRateHz / 2.0);
    std::vector<double> edges(kMelBins + 2);
    for (size_t i = 0; i < edges.size(); ++i) {
      edges[i] = MelToHz(top * static_cast<double>(i) /
                         static_cast<double>(kMelBins + 1));
    }
    std::vector<double> w(kMelBins * kFftBins, 0.0);
    for (size_t m = 0; m < kMelBins; ++m) {
      const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
      const double norm = 2.0 / (hi - lo);
      for (size_t k = 0; k < kFftBins; ++k) {
        const double hz = static_cast<double>(k) * kSampleRateHz /
                          static_cast<double>(kMelFftSize);
        const double rise = (hz - lo) / (center - lo);
        const double fall = (hi - hz) / (hi - center);
        const double tri = std::max(0.0, std::min(rise, fall));
        w[m * kFftBins + k] = tri * norm;
      }
    }
    return w;
  }();
  return bank;
}

Spectrogram MelPowerSpectrogram(const AudioBuffer& segment) {
  Require(segment.sample_rate_hz == kSampleRateHz,
          "mel spectrogram requires 8000 Hz input");
  Require(segment.size() == static_cast<size_t>(kSampleRateHz),
          "mel spectrogram requires exactly one second of audio");

  constexpr size_t kFftBins = kMelFftSize / 2 + 1;
  constexpr size_t kPad = kMelFftSize / 2;
  const size_t n = segment.size();
  static const std::vector<double> window = HannWindow(kMelFftSize);
  const std::vector<double>& bank = MelFilterbank();
  // Non-zero FFT bin range [first, second) of each filter.
  static const std::vector<std::pair<size_t, size_t>> support = [&] {
    std::vector<std::pair<size_t, size_t>> ranges(kMelBins, {0, 0});
    for (size_t m = 0; m < kMelBins; ++m) {
      size_t first = kFftBins, last = 0;
      for (size_t k = 0; k < kFftBins; ++k) {
        if (bank[m * kFftBins + k] != 0.0) {
          first = std::min(first, k);
          last = k + 1;
        }
      }
      if (first < last) ranges[m] = {first, last};
    }
    return ranges;
  }();

  // Reflect padding without repeating the edge sample.
  auto padded = [&](int64_t i) -> double {
    int64_t j = i - static_cast<int64_t>(kPad);
    if (j < 0) j = -j;
    const auto last = static_cast<int64_t>(n) - 1;
    if (j > last) j = 2 * last - j;
    return segment.samples[static_cast<size_t>(j)];
  };

  Spectrogram spec;
  spec.freq_bins = kMelBins;
  spec.time_frames = kMelFrames;
  spec.values.assign(kMelBins * kMelFrames, 0.0);
  spec.bin_hz.resize(kMelBins);
  for (size_t m = 0; m < kMelBins; ++m) spec.bin_hz[m] = MelBinCenterHz(m);

  std::vector<std::complex<double>> buf(kMelFftSize);
  std::vector<double> power(kFftBins);
  for (size_t t = 0; t < kMelFrames; ++t) {
    const auto start = static_cast<int64_t>(t * kMelHop);
    for (size_t i = 0; i < kMelFftSize; ++i) {
      buf[i] = padded(start + static_cast<int64_t>(i)) * window[i];
    }
    Fft(buf);
    for (size_t k = 0; k < kFftBins; ++k) power[k] = std::norm(buf[k]);
    for (size_t m = 0; m < kMelBins; ++m) {
      const double* w = &bank[m * kFftBins];
      double acc = 0.0;
      for (size_t k = support[m].first; k < support[m].second; ++k) {
        acc += w[k] * power[k];
      }
      spec.at(m, t) = acc;
    }
  }
  return spec;
}

Spectrogram MelSpectrogram(const AudioBuffer& segment) {
  Spectrogram spec = MelPowerSpectrogram(segment);
  for (double& v : spec.values) v = std::log(v + kLogFloor);
  return spec;
}

Spectrogram StftMagnitudeDb(const AudioBuffer& audio, const StftParams& params) {
  Require(IsPowerOfTwo(params.fft_size), "STFT size must be a power of two");
  Require(params.hop > 0, "STFT hop must be positive");
  const size_t bins = params.fft_size / 2 + 1;
  const size_t frames = audio.size() < params.fft_size
                            ? 0
                            : (audio.size() - params.fft_size) / params.hop + 1;
  Spectrogram spec;
  spec.freq_bins = bins;
  spec.time_frames = frames;
  spec.values.assign(bins * frames, -100.0);
  spec.bin_hz.resize(bins);
  for (size_t k = 0; k < bins; ++k) {
    spec.bin_hz[k] = static_cast<double>(k) * audio.sample_rate_hz /
                     static_cast<double>(params.fft_size);
  }
  const std::vector<double> window = HannWindow(params.fft_size);
  std::vector<std::complex<double>> buf(params.fft_size);
  for (size_t t = 0; t < frames; ++t) {
    const size_t start = t * params.hop;
    for (size_t i = 0; i < params.fft_size; ++i) {
      buf[i] = audio.samples[start + i] * window[i];
    }
    Fft(buf);
    for (size_t k = 0; k < bins; ++k) {
      const double mag = std::abs(buf[k]);
      spec.at(k, t) = mag > 1e-5 ? std::max(-100.0, 20.0 * std::log10(mag))
                                 : -100.0;
    }
  }
  return spec;
}

}  // namespace afp
