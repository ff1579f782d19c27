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

#include "afp/augment/augment.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "afp/common/error.h"
#include "afp/common/fft.h"

namespace afp {

namespace {

constexpr size_t kFirTaps = 1025;
constexpr size_t kFirDesignGrid = 8192;
constexpr double kFirKaiserBeta = 8.0;

bool ValidRolloff(int rolloff_db) {
  return std::find(std::begin(kRolloffChoicesDb), std::end(kRolloffChoicesDb),
                   rolloff_db) != std::end(kRolloffChoicesDb);
}

void ValidateFilter(const FilterSpec& spec, int sample_rate_hz) {
  Require(ValidRolloff(spec.rolloff_db),
          "roll-off must be one of 12, 24, 36 dB/octave");
  Require(spec.cutoff_hz > 0.0 && spec.cutoff_hz < sample_rate_hz / 2.0,
          "filter cutoff must lie strictly between 0 and Nyquist");
}

}  // namespace

bool InAugmentationRange(const FilterSpec& spec) {
  if (!ValidRolloff(spec.rolloff_db)) return false;
  if (spec.kind == FilterKind::kLowPass) {
    return spec.cutoff_hz > kLowPassMinHz && spec.cutoff_hz < kLowPassMaxHz;
  }
  return spec.cutoff_hz > kHighPassMinHz && spec.cutoff_hz < kHighPassMaxHz;
}

double FilterMagnitude(const FilterSpec& spec, double hz) {
  const double ratio = spec.kind == FilterKind::kLowPass
                           ? hz / spec.cutoff_hz
                           : (hz == 0.0 ? std::numeric_limits<double>::infinity()
                                        : spec.cutoff_hz / hz);
  if (std::isinf(ratio)) return 0.0;
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * spec.order()));
}

std::vector<double> DesignFilterFir(const FilterSpec& spec, int sample_rate_hz) {
  ValidateFilter(spec, sample_rate_hz);
  // Frequency sampling on a dense grid, zero phase, then a Kaiser window.
  std::vector<std::complex<double>> grid(kFirDesignGrid);
  for (size_t k = 0; k <= kFirDesignGrid / 2; ++k) {
    const double hz = static_cast<double>(k) * sample_rate_hz /
                      static_cast<double>(kFirDesignGrid);
    const double mag = FilterMagnitude(spec, hz);
    grid[k] = mag;
    if (k > 0 && k < kFirDesignGrid / 2) grid[kFirDesignGrid - k] = mag;
  }
  Fft(grid, /*inverse=*/true);

  const size_t half = kFirTaps / 2;
  const double norm = std::cyl_bessel_i(0.0, kFirKaiserBeta);
  std::vector<double> taps(kFirTaps);
  for (size_t i = 0; i < kFirTaps; ++i) {
    const auto lag = static_cast<int64_t>(i) - static_cast<int64_t>(half);
    const size_t idx = static_cast<size_t>(
        (lag + static_cast<int64_t>(kFirDesignGrid)) %
        static_cast<int64_t>(kFirDesignGrid));
    const double x = static_cast<double>(lag) / static_cast<double>(half);
    const double w =
        std::cyl_bessel_i(0.0, kFirKaiserBeta * std::sqrt(std::max(0.0, 1.0 - x * x))) /
        norm;
    taps[i] = grid[idx].real() * w;
  }
  return taps;
}

AudioBuffer ApplyFilter(const AudioBuffer& signal, const FilterSpec& spec) {
  const std::vector<double> taps = DesignFilterFir(spec, signal.sample_rate_hz);
  const std::vector<double> y =
      FftConvolveRange(std::span<const float>(signal.samples), taps,
                       taps.size() / 2, signal.size());
  return AudioBuffer(std::vector<float>(y.begin(), y.end()),
                     signal.sample_rate_hz);
}

std::optional<FilterSpec> SampleFilterSpec(Rng& rng, double probability) {
  Require(probability >= 0.0 && probability <= 1.0,
          "filter probability must be in [0, 1]");
  if (!rng.Bernoulli(probability)) return std::nullopt;
  FilterSpec spec;
  spec.kind = rng.UniformInt(2) == 0 ? FilterKind::kLowPass
                                     : FilterKind::kHighPass;
  const double lo =
      spec.kind == FilterKind::kLowPass ? kLowPassMinHz : kHighPassMinHz;
  const double hi =
      spec.kind == FilterKind::kLowPass ? kLowPassMaxHz : kHighPassMaxHz;
  do {
    spec.cutoff_hz = rng.Uniform(lo, hi);
  } while (spec.cutoff_hz <= lo);
  spec.rolloff_db = kRolloffChoicesDb[rng.UniformInt(3)];
  return spec;
}

double NoiseGainForSnr(double signal_power, double noise_power, double snr_db) {
  Require(signal_power > 0.0, "signal has zero power; SNR undefined");
  Require(noise_power > 0.0, "noise has zero power; SNR undefined");
  return std::sqrt(signal_power /
                   (noise_power * std::pow(10.0, snr_db / 10.0)));
}

AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db, size_t noise_offset) {
  Require(signal.sample_rate_hz == noise.sample_rate_hz,
          "signal and noise sample rates differ");
  Require(!noise.empty(), "noise is empty");
  const size_t n = signal.size();
  std::vector<double> excerpt(n);
  for (size_t i = 0; i < n; ++i) {
    excerpt[i] = noise.samples[(noise_offset + i) % noise.size()];
  }
  double noise_power = 0.0;
  for (double v : excerpt) noise_power += v * v;
  noise_power /= static_cast<double>(std::max<size_t>(n, 1));
  const double gain =
      NoiseGainForSnr(MeanPower(signal.samples), noise_power, snr_db);
  std::vector<float> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(signal.samples[i] + gain * excerpt[i]);
  }
  return AudioBuffer(std::move(out), signal.sample_rate_hz);
}

AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db, Rng& rng) {
  Require(!noise.empty(), "noise is empty");
  const size_t offset = noise.size() > signal.size()
                            ? rng.UniformInt(noise.size() - signal.size() + 1)
                            : rng.UniformInt(noise.size());
  return MixAtSnr(signal, noise, snr_db, offset);
}

AudioBuffer ConvolveIr(const AudioBuffer& signal, const AudioBuffer& ir) {
  Require(!ir.empty(), "impulse response is empty");
  Require(signal.sample_rate_hz == ir.sample_rate_hz,
          "signal and impulse response sample rates differ");
  const std::vector<double> kernel(ir.samples.begin(), ir.samples.end());
  const std::vector<double> y = FftConvolveRange(
      std::span<const float>(signal.samples), kernel, 0, signal.size());
  double out_peak = 0.0;
  for (double v : y) out_peak = std::max(out_peak, std::fabs(v));
  const double in_peak = Peak(signal.samples);
  const double scale = out_peak > 0.0 ? in_peak / out_peak : 0.0;
  std::vector<float> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = static_cast<float>(y[i] * scale);
  return AudioBuffer(std::move(out), signal.sample_rate_hz);
}

void AugmentConfig::Validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  Require(prob(ir_probability), "ir_probability must be in [0, 1]");
  Require(prob(filter_probability), "filter_probability must be in [0, 1]");
  Require(snr_min_db <= snr_max_db, "SNR range is empty");
  Require(time_offset_max_s >= 0.0, "time offset must be non-negative");
}

AudioBuffer BaselinePipeline(const AudioBuffer& source, size_t start,
                             size_t length, const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng) {
  cfg.Validate();
  Require(!cfg.noise_enabled() || !pools.noise.empty(), "noise pool is empty");
  Require(cfg.ir_probability == 0.0 || !pools.ir.empty(), "IR pool is empty");

  const double offset_s = rng.Uniform(-cfg.time_offset_max_s, cfg.time_offset_max_s);
  const auto shift = static_cast<int64_t>(std::llround(offset_s * source.sample_rate_hz));
  std::vector<float> window(length, 0.0f);
  for (size_t i = 0; i < length; ++i) {
    const int64_t idx = static_cast<int64_t>(start + i) + shift;
    if (idx >= 0 && idx < static_cast<int64_t>(source.size())) {
      window[i] = source.samples[static_cast<size_t>(idx)];
    }
  }
  AudioBuffer out(std::move(window), source.sample_rate_hz);

  if (rng.Bernoulli(cfg.ir_probability)) {
    const auto& ir = pools.ir[rng.UniformInt(pools.ir.size())];
    out = ConvolveIr(out, ir);
  }

  if (cfg.noise_enabled()) {
    const double snr = rng.Uniform(cfg.snr_min_db, cfg.snr_max_db);
    const auto& noise = pools.noise[rng.UniformInt(pools.noise.size())];
    // Gain is undefined for a silent window; leave it untouched.
    if (MeanPower(out.samples) > 0.0) out = MixAtSnr(out, noise, snr, rng);
  }
  return out;
}

AudioBuffer BaselinePipeline(const AudioBuffer& segment,
                             const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng) {
  return BaselinePipeline(segment, 0, segment.size(), pools, cfg, rng);
}

AudioBuffer ProposedPipeline(const AudioBuffer& source, size_t start,
                             size_t length, const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng) {
  AudioBuffer out = BaselinePipeline(source, start, length, pools, cfg, rng);
  if (auto spec = SampleFilterSpec(rng, cfg.filter_probability)) {
    out = ApplyFilter(out, *spec);
  }
  return out;
}

AudioBuffer ProposedPipeline(const AudioBuffer& segment,
                             const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng) {
  return ProposedPipeline(segment, 0, segment.size(), pools, cfg, rng);
}

}  // namespace afp
