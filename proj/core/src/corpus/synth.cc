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

#include "afp/corpus/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "afp/augment/pool.h"
#include "afp/common/error.h"
#include "afp/common/rng.h"
#include "afp/dsp/wav.h"
#include "afp/retrieval/catalog.h"

namespace afp::corpus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRate = kSampleRateHz;
constexpr int kScale[] = {0, 2, 4, 7, 9};
constexpr int kMaxHarmonics = 6;

void Normalize(std::vector<double>& x, double target_peak) {
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak > 0) {
    for (double& v : x) v *= target_peak / peak;
  }
}

void NormalizeRms(std::vector<double>& x, double target_rms) {
  double p = 0;
  for (double v : x) p += v * v;
  p = std::sqrt(p / static_cast<double>(x.size()));
  if (p > 0) {
    for (double& v : x) v *= target_rms / p;
  }
}

AudioBuffer ToBuffer(const std::vector<double>& x) {
  return AudioBuffer(std::vector<float>(x.begin(), x.end()), kSampleRateHz);
}

// RBJ band-pass biquad with 0 dB peak gain.
struct BandPass {
  double b0 = 0, b2 = 0, a1 = 0, a2 = 0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  void Tune(double hz, double q) {
    const double w0 = kTwoPi * hz / kRate;
    const double alpha = std::sin(w0) / (2 * q);
    const double a0 = 1 + alpha;
    b0 = alpha / a0;
    b2 = -alpha / a0;
    a1 = -2 * std::cos(w0) / a0;
    a2 = (1 - alpha) / a0;
  }
  double Step(double x) {
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

void RenderVoice(std::vector<double>& out, Rng& rng, double root_hz,
                 int octave, double beat_s) {
  std::array<double, kMaxHarmonics> harmonic{};
  std::array<double, kMaxHarmonics> phase{};
  for (int h = 0; h < kMaxHarmonics; ++h) {
    harmonic[h] = rng.Uniform(0.2, 1.0) / (h + 1);
    phase[h] = rng.Uniform(0, kTwoPi);
  }
  const double decay_s = rng.Uniform(0.15, 0.6);
  const double rest_probability = rng.Uniform(0.05, 0.25);
  constexpr double kBeatChoices[] = {0.5, 1.0, 1.0, 2.0};

  const auto total = out.size();
  size_t cursor = static_cast<size_t>(rng.UniformInt(static_cast<uint64_t>(beat_s * kRate)));
  while (cursor < total) {
    const double beats = kBeatChoices[rng.UniformInt(4)];
    const auto len = static_cast<size_t>(beats * beat_s * kRate);
    const bool rest = rng.Bernoulli(rest_probability);
    const int degree = kScale[rng.UniformInt(5)] + 12 * static_cast<int>(rng.UniformInt(2));
    const double hz = root_hz * std::pow(2.0, octave + degree / 12.0);
    const double amp = rng.Uniform(0.5, 1.0);
    if (!rest) {
      const size_t end = std::min(total, cursor + len);
      const double attack = 0.005 * kRate;
      const double release = 0.01 * kRate;
      for (size_t i = cursor; i < end; ++i) {
        const double t = static_cast<double>(i - cursor);
        double env = amp * std::exp(-t / (decay_s * kRate));
        if (t < attack) env *= t / attack;
        const double remaining = static_cast<double>(cursor + len - i);
        if (remaining < release) env *= remaining / release;
        double v = 0;
        for (int h = 0; h < kMaxHarmonics; ++h) {
          const double f = hz * (h + 1);
          if (f >= 0.48 * kRate) break;
          v += harmonic[h] * std::sin(kTwoPi * f * t / kRate + phase[h]);
        }
        out[i] += env * v;
      }
    }
    cursor += len;
  }
}

void RenderPercussion(std::vector<double>& out, Rng& rng, double beat_s) {
  // One bar of 16 steps, re-drawn with small variations every four bars.
  const double step_s = beat_s / 4;
  std::array<int, 16> pattern{};
  auto draw = [&] {
    for (int& p : pattern) {
      const double u = rng.Uniform();
      p = u < 0.18 ? 1 : (u < 0.45 ? 2 : 0);  // 1 = kick, 2 = hat
    }
  };
  draw();
  const double level = rng.Uniform(0.2, 0.5);
  const auto step_len = static_cast<size_t>(step_s * kRate);
  for (size_t step = 0; step * step_len < out.size(); ++step) {
    if (step % 64 == 63) draw();
    const int hit = pattern[step % 16];
    if (hit == 0) continue;
    const size_t start = step * step_len;
    if (hit == 1) {
      const size_t len = std::min(out.size() - start, static_cast<size_t>(0.15 * kRate));
      double ph = 0;
      for (size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / kRate;
        const double f = 50.0 + 100.0 * std::exp(-t / 0.03);
        ph += kTwoPi * f / kRate;
        out[start + i] += level * std::exp(-t / 0.06) * std::sin(ph);
      }
    } else {
      const size_t len = std::min(out.size() - start, static_cast<size_t>(0.06 * kRate));
      double prev = 0;
      for (size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / kRate;
        const double n = rng.Normal();
        out[start + i] += 0.5 * level * std::exp(-t / 0.015) * (n - prev);
        prev = n;
      }
    }
  }
}

std::vector<double> Babble(size_t n, Rng& rng) {
  constexpr int kTalkers = 6;
  std::vector<double> out(n, 0.0);
  for (int talker = 0; talker < kTalkers; ++talker) {
    BandPass f1, f2;
    double f0 = rng.Uniform(90, 250);
    double phase = 0;
    size_t i = 0;
    while (i < n) {
      const auto syllable = static_cast<size_t>(rng.Uniform(0.12, 0.3) * kRate);
      const size_t end = std::min(n, i + syllable);
      f1.Tune(rng.Uniform(300, 900), 5.0);
      f2.Tune(rng.Uniform(900, 2500), 8.0);
      f0 = std::clamp(f0 * std::exp(rng.Uniform(-0.15, 0.15)), 80.0, 280.0);
      const bool voiced = rng.Bernoulli(0.75);
      const double amp = rng.Bernoulli(0.15) ? 0.0 : rng.Uniform(0.5, 1.0);
      for (size_t k = i; k < end; ++k) {
        const double u = static_cast<double>(k - i) / static_cast<double>(end - i);
        const double env = amp * std::sin(std::numbers::pi * u);
        double source;
        if (voiced) {
          phase += f0 / kRate;
          if (phase >= 1.0) phase -= 1.0;
          source = (phase < 0.1 ? 1.0 : 0.0) - 0.1 + 0.1 * rng.Normal();
        } else {
          source = 0.5 * rng.Normal();
        }
        out[k] += env * (f1.Step(source) + 0.6 * f2.Step(source));
      }
      i = end;
    }
  }
  return out;
}

std::vector<double> Hum(size_t n, Rng& rng) {
  constexpr double kMains = 50.0;
  std::vector<double> amp, phase;
  for (int h = 1; h * kMains < 1000.0; ++h) {
    amp.push_back(rng.Uniform(0.3, 1.0) / h);
    phase.push_back(rng.Uniform(0, kTwoPi));
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    double v = 0;
    for (size_t h = 0; h < amp.size(); ++h) {
      v += amp[h] * std::sin(kTwoPi * kMains * static_cast<double>(h + 1) *
                                 static_cast<double>(i) / kRate + phase[h]);
    }
    out[i] = v;
  }
  return out;
}

}  // namespace

AudioBuffer SynthSong(const SynthSongSpec& spec) {
  Require(spec.duration_s >= 5.0, "synthetic songs must be at least 5 s long");
  Require(spec.voices >= 1, "synthetic songs need at least one voice");
  Require(spec.tempo_bpm > 0, "tempo must be positive");
  Rng rng(spec.seed);
  const auto n = static_cast<size_t>(std::llround(spec.duration_s * kRate));
  std::vector<double> mix(n, 0.0);
  const double root = 110.0 * std::pow(2.0, rng.Uniform(0.0, 1.0));
  const double beat_s = 60.0 / spec.tempo_bpm;
  for (int v = 0; v < spec.voices; ++v) {
    RenderVoice(mix, rng, root, 1 + v % 3, beat_s);
  }
  RenderPercussion(mix, rng, beat_s);
  Normalize(mix, 0.9);
  return ToBuffer(mix);
}

SynthSongSpec RandomSongSpec(uint64_t seed, double duration_s) {
  Rng rng(DeriveSeed(seed, 0xC0FFEE));
  SynthSongSpec spec;
  spec.seed = seed;
  spec.duration_s = duration_s;
  spec.voices = 2 + static_cast<int>(rng.UniformInt(3));
  spec.tempo_bpm = rng.Uniform(80.0, 160.0);
  return spec;
}

NoiseKind ParseNoiseKind(const std::string& name) {
  if (name == "babble") return NoiseKind::kBabble;
  if (name == "hum") return NoiseKind::kHum;
  if (name == "broadband") return NoiseKind::kBroadband;
  throw InvalidArgument("unknown noise kind '" + name + "'");
}

std::string NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kHum: return "hum";
    case NoiseKind::kBroadband: return "broadband";
  }
  return "unknown";
}

AudioBuffer SynthNoise(NoiseKind kind, double duration_s, uint64_t seed) {
  Require(duration_s > 0, "noise duration must be positive");
  Rng rng(seed);
  const auto n = static_cast<size_t>(std::llround(duration_s * kRate));
  std::vector<double> x;
  switch (kind) {
    case NoiseKind::kBabble:
      x = Babble(n, rng);
      break;
    case NoiseKind::kHum:
      x = Hum(n, rng);
      break;
    case NoiseKind::kBroadband:
      x.resize(n);
      for (double& v : x) v = rng.Normal();
      break;
  }
  NormalizeRms(x, 0.1);
  return ToBuffer(x);
}

AudioBuffer SynthIr(double rt60_s, uint64_t seed) {
  Require(rt60_s > 0.05 && rt60_s < 1.0, "rt60 must be in (0.05, 1.0) s");
  Rng rng(seed);
  const auto n = static_cast<size_t>(std::ceil(1.2 * rt60_s * kRate)) + 1;
  std::vector<double> h(n);
  h[0] = 1.0;
  for (size_t i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    // Amplitude 10^(-3 t / rt60) is -60 dB at t = rt60.
    h[i] = 0.3 * rng.Normal() * std::pow(10.0, -3.0 * t / rt60_s);
  }
  return ToBuffer(h);
}

void WriteCorpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
  namespace fs = std::filesystem;
  const fs::path songs_dir = dir / "songs";
  const fs::path noise_dir = dir / "noise";
  const fs::path ir_dir = dir / "ir";
  for (const auto& d : {songs_dir, noise_dir, ir_dir}) fs::create_directories(d);

  SongCatalog catalog;
  for (int i = 0; i < spec.songs; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "song_%04d.wav", i);
    const SynthSongSpec song =
        RandomSongSpec(DeriveSeed(spec.seed, 1000 + i), spec.song_duration_s);
    SaveWav(songs_dir / name, SynthSong(song));
    catalog[static_cast<uint32_t>(i)] = {fs::path(name).stem().string(), name,
                                         spec.song_duration_s};
  }
  WriteCatalog(songs_dir / "songs.json", catalog);

  PoolManifest noise_manifest;
  for (NoiseKind kind : {NoiseKind::kBabble, NoiseKind::kHum, NoiseKind::kBroadband}) {
    std::vector<std::string> names;
    for (int i = 0; i < spec.noise_files_per_kind; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%02d.wav", NoiseKindName(kind).c_str(), i);
      const uint64_t seed =
          DeriveSeed(spec.seed, 2000 + 100 * static_cast<uint64_t>(kind) + i);
      SaveWav(noise_dir / name, SynthNoise(kind, spec.noise_duration_s, seed));
      names.emplace_back(name);
    }
    const PoolManifest part = SplitNames(names, 0.7, 0.2);
    auto append = [](std::vector<std::string>& to, const std::vector<std::string>& from) {
      to.insert(to.end(), from.begin(), from.end());
    };
    append(noise_manifest.train, part.train);
    append(noise_manifest.validation, part.validation);
    append(noise_manifest.test, part.test);
  }
  WriteManifest(noise_dir / "manifest.json", noise_manifest);

  std::vector<std::string> ir_names;
  Rng rt_rng(DeriveSeed(spec.seed, 3000));
  for (int i = 0; i < spec.irs; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "ir_%02d.wav", i);
    const double rt60 = rt_rng.Uniform(0.1, 0.7);
    SaveWav(ir_dir / name, SynthIr(rt60, DeriveSeed(spec.seed, 3100 + i)));
    ir_names.emplace_back(name);
  }
  WriteManifest(ir_dir / "manifest.json", SplitNames(ir_names, 0.8, 0.2));
}

}  // namespace afp::corpus
