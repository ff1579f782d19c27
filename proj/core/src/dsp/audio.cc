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

#include "afp/dsp/audio.h"

#include <algorithm>
#include <cmath>

#include "afp/common/error.h"

namespace afp {

AudioBuffer AudioBuffer::Slice(size_t start, size_t length) const {
  Require(start + length <= samples.size(), "slice exceeds buffer");
  return AudioBuffer(
      std::vector<float>(samples.begin() + static_cast<std::ptrdiff_t>(start),
                         samples.begin() +
                             static_cast<std::ptrdiff_t>(start + length)),
      sample_rate_hz);
}

void AudioBuffer::Validate() const {
  Require(sample_rate_hz > 0, "sample rate must be positive");
  for (float s : samples) {
    Require(std::isfinite(s), "audio contains a non-finite sample");
  }
}

double MeanPower(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : samples) sum += static_cast<double>(s) * s;
  return sum / static_cast<double>(samples.size());
}

double Rms(std::span<const float> samples) {
  return std::sqrt(MeanPower(samples));
}

double Peak(std::span<const float> samples) {
  double peak = 0.0;
  for (float s : samples) peak = std::max(peak, std::fabs(static_cast<double>(s)));
  return peak;
}

}  // namespace afp
