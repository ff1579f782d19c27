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

// Distortion model used to build positive pairs during training and to
// degrade evaluation material: background noise at a target SNR, impulse
// response convolution, and octave roll-off low/high-pass filtering.
//
//   baseline  = noise( ir( shift(x) ) )
//   proposed  = filter( baseline(x) )
//
// Every random choice is drawn from an explicit Rng in a fixed order, so a
// given seed replays bit-for-bit.

#ifndef AFP_AUGMENT_AUGMENT_H_
#define AFP_AUGMENT_AUGMENT_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "afp/common/rng.h"
#include "afp/dsp/audio.h"

namespace afp {

enum class FilterKind { kLowPass, kHighPass };

// Low- or high-pass filter with a continuous roll-off of rolloff_db dB per
// octave past cutoff_hz, realized as the magnitude response of an analog
// Butterworth filter of order rolloff_db / 6.
struct FilterSpec {
  FilterKind kind = FilterKind::kLowPass;
  double cutoff_hz = 2500.0;
  int rolloff_db = 12;

  int order() const { return rolloff_db / 6; }
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

// Cutoff ranges the augmentation sampler draws from.
inline constexpr double kLowPassMinHz = 2000.0;
inline constexpr double kLowPassMaxHz = 3000.0;
inline constexpr double kHighPassMinHz = 500.0;
inline constexpr double kHighPassMaxHz = 1000.0;
inline constexpr int kRolloffChoicesDb[] = {12, 24, 36};

// True when the spec lies in the sampler's domain: cutoff inside the open
// range for its kind and roll-off one of {12, 24, 36}.
bool InAugmentationRange(const FilterSpec& spec);

// |H(f)| of the filter, in linear amplitude.
double FilterMagnitude(const FilterSpec& spec, double hz);

// Linear-phase FIR approximating FilterMagnitude at `sample_rate_hz`.
// Odd length; the group delay is (size - 1) / 2 samples.
std::vector<double> DesignFilterFir(const FilterSpec& spec, int sample_rate_hz);

// Filters `signal` (delay compensated, output length = input length).
// Throws InvalidArgument if the cutoff is not inside (0, Nyquist) or the
// roll-off is not one of {12, 24, 36}.
AudioBuffer ApplyFilter(const AudioBuffer& signal, const FilterSpec& spec);

// With probability `probability` returns a spec: kind uniform over
// {low, high}, cutoff uniform in the kind's open range, roll-off uniform over
// {12, 24, 36}. Otherwise std::nullopt.
std::optional<FilterSpec> SampleFilterSpec(Rng& rng, double probability = 0.4);

// Gain g that makes 10 log10(signal_power / (g^2 noise_power)) == snr_db.
double NoiseGainForSnr(double signal_power, double noise_power, double snr_db);

// signal + g * noise at the requested SNR. A noise buffer longer than the
// signal is cropped at a random offset; a shorter one is tiled from a random
// offset. Powers are measured on the signal and on the noise excerpt actually
// used. Throws InvalidArgument if either has zero power or the rates differ.
AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db, Rng& rng);
// Deterministic variant: the noise excerpt starts at `noise_offset`.
AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db, size_t noise_offset);

// Linear convolution with `ir`, truncated to the signal length and rescaled
// so the output peak equals the input peak.
AudioBuffer ConvolveIr(const AudioBuffer& signal, const AudioBuffer& ir);

struct AugmentConfig {
  // Noise SNR is drawn uniformly from [snr_min_db, snr_max_db]. Setting both
  // to +infinity disables noise mixing.
  double snr_min_db = 0.0;
  double snr_max_db = 10.0;
  double ir_probability = 0.5;
  double filter_probability = 0.4;
  double time_offset_max_s = 0.2;
  uint64_t rng_seed = 0;

  bool noise_enabled() const {
    return snr_min_db != std::numeric_limits<double>::infinity();
  }
  // Throws InvalidArgument on out-of-range probabilities or an empty range.
  void Validate() const;
};

struct AugmentPools {
  std::vector<AudioBuffer> noise;
  std::vector<AudioBuffer> ir;
};

// Baseline distortion of `length` samples of `source` starting at `start`:
// the window is shifted by a uniform offset in +-time_offset_max_s (samples
// outside the source read as zero), convolved with a random pool IR with
// probability ir_probability, then mixed with a random pool noise at an SNR
// drawn from the configured range. Output length equals `length`.
AudioBuffer BaselinePipeline(const AudioBuffer& source, size_t start,
                             size_t length, const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng);
AudioBuffer BaselinePipeline(const AudioBuffer& segment,
                             const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng);

// BaselinePipeline followed by ApplyFilter with a spec drawn by
// SampleFilterSpec(rng, cfg.filter_probability).
AudioBuffer ProposedPipeline(const AudioBuffer& source, size_t start,
                             size_t length, const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng);
AudioBuffer ProposedPipeline(const AudioBuffer& segment,
                             const AugmentPools& pools,
                             const AugmentConfig& cfg, Rng& rng);

enum class AugmentKind { kBaseline, kProposed };

}  // namespace afp

#endif  // AFP_AUGMENT_AUGMENT_H_
