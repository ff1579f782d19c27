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

// Deterministic stand-ins for music, background noise and room responses so
// the whole pipeline can run without external data.

#ifndef AFP_CORPUS_SYNTH_H_
#define AFP_CORPUS_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "afp/dsp/audio.h"

namespace afp::corpus {

struct SynthSongSpec {
  uint64_t seed = 0;
  double duration_s = 30.0;
  int voices = 3;
  double tempo_bpm = 120.0;
};

// Pentatonic pseudo-music: each voice plays a seeded note sequence with its
// own harmonic timbre and decay envelope, over a seeded percussion track.
// Peak-normalized to 0.9, 8 kHz. Throws InvalidArgument if duration < 5 s or
// voices < 1.
AudioBuffer SynthSong(const SynthSongSpec& spec);

// Spec with tempo and voice count drawn from `seed`.
SynthSongSpec RandomSongSpec(uint64_t seed, double duration_s);

enum class NoiseKind { kBabble, kHum, kBroadband };
NoiseKind ParseNoiseKind(const std::string& name);
std::string NoiseKindName(NoiseKind kind);

// Noise of the given class at RMS 0.1, 8 kHz.
AudioBuffer SynthNoise(NoiseKind kind, double duration_s, uint64_t seed);

// Unit impulse followed by a seeded Gaussian tail whose envelope falls by
// 60 dB at rt60_s. rt60_s must be in (0.05, 1.0).
AudioBuffer SynthIr(double rt60_s, uint64_t seed);

struct CorpusSpec {
  uint64_t seed = 2026;
  int songs = 100;
  double song_duration_s = 30.0;
  int noise_files_per_kind = 10;
  double noise_duration_s = 30.0;
  int irs = 5;
};

// Writes songs/, noise/ and ir/ (PCM16 WAV) under `dir`, plus a
// manifest.json per pool (noise 70/20/10 stratified by kind, IR 80/20) and
// songs/songs.json (song_id -> {title, source_path, duration_s}).
void WriteCorpus(const std::filesystem::path& dir, const CorpusSpec& spec);

}  // namespace afp::corpus

#endif  // AFP_CORPUS_SYNTH_H_
