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

#ifndef AFP_DSP_WAV_H_
#define AFP_DSP_WAV_H_

#include <filesystem>
#include <istream>

#include "afp/dsp/audio.h"

namespace afp {

// Reads a RIFF/WAVE file holding 16-bit PCM with one or two channels.
// Stereo is downmixed by channel mean; samples are scaled by 1/32768.
// Throws FormatError on a missing file, a non-PCM16 payload, or a
// truncated chunk.
AudioBuffer LoadWav(const std::filesystem::path& path);
AudioBuffer ReadWav(std::istream& in);

// Writes mono PCM16. Samples are clipped to [-1, 1) and rounded to nearest.
void SaveWav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace afp

#endif  // AFP_DSP_WAV_H_
