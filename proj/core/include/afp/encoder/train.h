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

// Contrastive training loop and its gradient check.
//
// Each step samples N one-second fragments from N distinct songs, forms
// rows 0..N-1 from the clean fragments and rows N..2N-1 from their
// augmented versions (row N + k is the augmentation of row k), and takes one
// momentum SGD step on BatchLoss.

#ifndef AFP_ENCODER_TRAIN_H_
#define AFP_ENCODER_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "afp/augment/augment.h"
#include "afp/dsp/audio.h"
#include "afp/dsp/features.h"
#include "afp/encoder/model.h"

namespace afp {

struct TrainConfig {
  size_t batch_pairs = 32;  // N; the batch holds 2N rows
  double temperature = 0.05;
  size_t epochs = 120;
  // 0 selects (gated 1 s segments in the corpus) / N.
  size_t steps_per_epoch = 0;
  double learning_rate = 3e-3;
  double learning_rate_floor = 1e-7;
  double momentum = 0.9;
  uint64_t seed = 0;

  // Throws InvalidArgument on tau <= 0, N < 1 or a bad schedule.
  void Validate() const;
  // Cosine decay from learning_rate to learning_rate_floor over
  // `total_steps`.
  double LearningRateAt(size_t step, size_t total_steps) const;
};

struct BatchRecord {
  size_t epoch = 0;
  size_t step = 0;
  // Source of every row; `song_id` indexes the training song list.
  std::vector<SegmentRef> rows;
  std::vector<bool> augmented;
  double loss = 0.0;
};

struct TrainHooks {
  std::function<void(const BatchRecord&)> on_batch;
  std::function<void(size_t epoch, double loss, double probe_loss)> on_epoch;
};

struct TrainResult {
  Encoder encoder;
  // Mean training-batch loss per epoch.
  std::vector<double> epoch_loss;
  // Loss of one fixed held-aside batch, evaluated after every epoch.
  std::vector<double> probe_loss;
};

// Throws InvalidArgument if fewer than N songs have a segment passing the
// energy gate, and NumericalError if the loss becomes non-finite.
TrainResult TrainEncoder(std::span<const AudioBuffer> songs,
                         const AugmentPools& pools, const AugmentConfig& aug,
                         AugmentKind kind, const EncoderConfig& encoder,
                         const TrainConfig& config, const TrainHooks& hooks = {});

// Loss of a 2N-row batch of spectrograms and its parameter gradient.
double BatchLossOf(const Encoder& encoder, std::span<const Spectrogram> batch,
                   double tau);
std::vector<double> BatchGradient(const Encoder& encoder,
                                  std::span<const Spectrogram> batch,
                                  double tau, double* loss = nullptr);

using GradientFn = std::function<std::vector<double>(
    const Encoder&, std::span<const Spectrogram>, double)>;

// Max over `probe_count` random parameters of |a - n| / max(|n|, 1e-6),
// where a is the analytic gradient (BatchGradient unless `gradient` is set)
// and n the central difference with step 1e-4. Zero probes return 0.
double GradientCheck(const Encoder& encoder, std::span<const Spectrogram> batch,
                     double tau, size_t probe_count, uint64_t seed,
                     const GradientFn& gradient = {});

// Fraction of `pairs` held-out fragments whose augmented embedding is more
// similar to its own clean embedding than to the mean of the other clean
// embeddings.
double PositiveMarginRate(const Encoder& encoder,
                          std::span<const AudioBuffer> songs,
                          const AugmentPools& pools, const AugmentConfig& aug,
                          AugmentKind kind, size_t pairs, uint64_t seed);

}  // namespace afp

#endif  // AFP_ENCODER_TRAIN_H_
