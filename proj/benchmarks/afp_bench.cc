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
#include <vector>

#include "afp/augment/augment.h"
#include "afp/common/rng.h"
#include "afp/corpus/synth.h"
#include "afp/dsp/features.h"
#include "afp/encoder/model.h"
#include "afp/encoder/train.h"
#include "afp/peakfp/peakfp.h"
#include "afp/pqindex/pqindex.h"
#include "benchmark/benchmark.h"

namespace afp {
namespace {

const AudioBuffer& Song30s() {
  static const AudioBuffer song = corpus::SynthSong(corpus::RandomSongSpec(1, 30.0));
  return song;
}

void BM_MelSpectrogram(benchmark::State& state) {
  const AudioBuffer segment = Song30s().Slice(8000, 8000);
  for (auto _ : state) benchmark::DoNotOptimize(MelSpectrogram(segment));
}
BENCHMARK(BM_MelSpectrogram);

void BM_EncoderForward(benchmark::State& state) {
  const Encoder encoder(EncoderConfig{}, 1);
  const Spectrogram spec = MelSpectrogram(Song30s().Slice(8000, 8000));
  for (auto _ : state) benchmark::DoNotOptimize(encoder.Forward(spec, nullptr));
}
BENCHMARK(BM_EncoderForward);

// One training step's gradient over 2N rows.
void BM_BatchGradient(benchmark::State& state) {
  const Encoder encoder(EncoderConfig{}, 1);
  std::vector<Spectrogram> batch;
  for (int64_t i = 0; i < 2 * state.range(0); ++i) {
    batch.push_back(MelSpectrogram(Song30s().Slice(4000 * (i % 59), 8000)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(BatchGradient(encoder, batch, 0.05));
  state.SetItemsProcessed(state.iterations() * batch.size());
}
BENCHMARK(BM_BatchGradient)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ProposedPipeline(benchmark::State& state) {
  AugmentPools pools{{corpus::SynthNoise(corpus::NoiseKind::kBabble, 10.0, 2)},
                     {corpus::SynthIr(0.5, 3)}};
  AugmentConfig cfg;
  cfg.ir_probability = 1.0;
  cfg.filter_probability = 1.0;
  Rng rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ProposedPipeline(Song30s(), 40000, 8000, pools, cfg, rng));
  }
}
BENCHMARK(BM_ProposedPipeline);

void BM_PqSearch(benchmark::State& state) {
  const size_t n = state.range(0);
  Rng rng(5);
  std::vector<float> data(n * 64);
  for (size_t r = 0; r < n; ++r) {
    double norm = 0.0;
    for (size_t d = 0; d < 64; ++d) {
      data[r * 64 + d] = static_cast<float>(rng.Normal());
      norm += data[r * 64 + d] * data[r * 64 + d];
    }
    for (size_t d = 0; d < 64; ++d) data[r * 64 + d] /= static_cast<float>(std::sqrt(norm));
  }
  IndexConfig c;
  c.max_training_sample = 20000;
  FingerprintIndex index(c);
  index.Train(data);
  for (size_t r = 0; r < n; ++r) {
    index.Add({static_cast<uint32_t>(r / 100), static_cast<uint32_t>(r % 100)},
              std::span<const float>(data).subspan(r * 64, 64));
  }
  size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.Search(std::span<const float>(data).subspan((q++ % n) * 64, 64), 4));
  }
}
BENCHMARK(BM_PqSearch)->Arg(20000)->Arg(100000);

void BM_PeakMatch(benchmark::State& state) {
  PeakIndex index;
  for (uint32_t s = 0; s < 20; ++s) {
    index.Add(s, FingerprintAudio(corpus::SynthSong(corpus::RandomSongSpec(100 + s, 30.0))));
  }
  const std::vector<Landmark> query = FingerprintAudio(Song30s().Slice(0, 80000));
  for (auto _ : state) benchmark::DoNotOptimize(index.Match(query));
}
BENCHMARK(BM_PeakMatch);

}  // namespace
}  // namespace afp

BENCHMARK_MAIN();
