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

#include "afp/encoder/train.h"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "afp/common/error.h"
#include "afp/common/rng.h"
#include "afp/encoder/loss.h"

namespace afp {
namespace {

constexpr double kFiniteDifferenceStep = 1e-4;

struct Fragment {
  uint32_t song = 0;
  uint32_t segment = 0;
};

// Gated 1 s segment indices of every song.
std::vector<std::vector<uint32_t>> GatedSegments(std::span<const AudioBuffer> songs) {
  std::vector<std::vector<uint32_t>> out(songs.size());
  for (size_t s = 0; s < songs.size(); ++s) {
    Require(songs[s].sample_rate_hz == kSampleRateHz, "training songs must be 8 kHz");
    const size_t count = SegmentCount(songs[s].size(), kSampleRateHz);
    const size_t len = SegmentStart(1, kSampleRateHz) * 2;
    for (size_t i = 0; i < count; ++i) {
      const size_t start = SegmentStart(i, kSampleRateHz);
      if (PassesEnergyGate(std::span<const float>(songs[s].samples).subspan(start, len))) {
        out[s].push_back(static_cast<uint32_t>(i));
      }
    }
  }
  return out;
}

class BatchSampler {
 public:
  BatchSampler(std::span<const AudioBuffer> songs, size_t pairs)
      : songs_(songs), gated_(GatedSegments(songs)), pairs_(pairs) {
    for (size_t s = 0; s < gated_.size(); ++s) {
      if (!gated_[s].empty()) eligible_.push_back(static_cast<uint32_t>(s));
      total_segments_ += gated_[s].size();
    }
    Require(eligible_.size() >= pairs,
            "need at least " + std::to_string(pairs) +
                " songs with audible segments, have " +
                std::to_string(eligible_.size()));
  }

  size_t total_segments() const { return total_segments_; }

  // N fragments from N distinct songs.
  std::vector<Fragment> Sample(Rng& rng) {
    std::vector<uint32_t> pool = eligible_;
    std::vector<Fragment> out(pairs_);
    for (size_t k = 0; k < pairs_; ++k) {
      const size_t pick = k + rng.UniformInt(pool.size() - k);
      std::swap(pool[k], pool[pick]);
      const auto& segs = gated_[pool[k]];
      out[k] = {pool[k], segs[rng.UniformInt(segs.size())]};
    }
    return out;
  }

  // Clean spectrograms in rows 0..N-1, augmented in rows N..2N-1.
  std::vector<Spectrogram> Build(const std::vector<Fragment>& fragments,
                                 const AugmentPools& pools,
                                 const AugmentConfig& aug, AugmentKind kind,
                                 Rng& aug_rng) {
    const size_t n = fragments.size();
    const size_t len = static_cast<size_t>(kSegmentSeconds * kSampleRateHz);
    std::vector<Spectrogram> batch(2 * n);
    for (size_t k = 0; k < n; ++k) {
      const AudioBuffer& song = songs_[fragments[k].song];
      const size_t start = SegmentStart(fragments[k].segment, kSampleRateHz);
      batch[k] = CleanSpectrogram(fragments[k], song.Slice(start, len));
      const AudioBuffer distorted =
          kind == AugmentKind::kProposed
              ? ProposedPipeline(song, start, len, pools, aug, aug_rng)
              : BaselinePipeline(song, start, len, pools, aug, aug_rng);
      batch[n + k] = MelSpectrogram(distorted);
    }
    return batch;
  }

 private:
  // Clean windows recur across epochs; keep up to kCleanCacheLimit of them.
  static constexpr size_t kCleanCacheLimit = 4096;

  Spectrogram CleanSpectrogram(const Fragment& f, const AudioBuffer& segment) {
    const uint64_t key = (static_cast<uint64_t>(f.song) << 32) | f.segment;
    if (auto it = clean_cache_.find(key); it != clean_cache_.end()) return it->second;
    Spectrogram spec = MelSpectrogram(segment);
    if (clean_cache_.size() < kCleanCacheLimit) clean_cache_.emplace(key, spec);
    return spec;
  }

  std::span<const AudioBuffer> songs_;
  std::unordered_map<uint64_t, Spectrogram> clean_cache_;
  std::vector<std::vector<uint32_t>> gated_;
  std::vector<uint32_t> eligible_;
  size_t pairs_;
  size_t total_segments_ = 0;
};

}  // namespace

void TrainConfig::Validate() const {
  Require(batch_pairs >= 1, "batch_pairs must be at least 1");
  Require(temperature > 0.0, "temperature must be positive");
  Require(epochs >= 1, "epochs must be at least 1");
  Require(learning_rate >= 0.0 && learning_rate_floor >= 0.0 &&
              learning_rate_floor <= learning_rate,
          "learning rate schedule must satisfy 0 <= floor <= initial");
  Require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
}

double TrainConfig::LearningRateAt(size_t step, size_t total_steps) const {
  if (total_steps <= 1) return learning_rate;
  const double progress =
      static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return learning_rate_floor + 0.5 * (learning_rate - learning_rate_floor) *
                                   (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<double> BatchGradient(const Encoder& encoder,
                                  std::span<const Spectrogram> batch,
                                  double tau, double* loss) {
  std::vector<Encoder::Tape> tapes(batch.size());
  EmbeddingMatrix z(batch.size());
  for (size_t r = 0; r < batch.size(); ++r) z[r] = encoder.Forward(batch[r], &tapes[r]);
  EmbeddingMatrix dz;
  const double value = BatchLossGradient(z, tau, &dz);
  if (loss) *loss = value;
  std::vector<double> grad(encoder.params().size(), 0.0);
  for (size_t r = 0; r < batch.size(); ++r) encoder.Backward(tapes[r], dz[r], grad);
  return grad;
}

double BatchLossOf(const Encoder& encoder, std::span<const Spectrogram> batch,
                   double tau) {
  EmbeddingMatrix z(batch.size());
  for (size_t r = 0; r < batch.size(); ++r) z[r] = encoder.Forward(batch[r]);
  return BatchLoss(z, tau);
}

double GradientCheck(const Encoder& encoder, std::span<const Spectrogram> batch,
                     double tau, size_t probe_count, uint64_t seed,
                     const GradientFn& gradient) {
  if (probe_count == 0) return 0.0;
  const std::vector<double> analytic =
      gradient ? gradient(encoder, batch, tau) : BatchGradient(encoder, batch, tau);
  Require(analytic.size() == encoder.params().size(), "gradient size mismatch");
  Rng rng(seed);
  Encoder probe = encoder;
  double worst = 0.0;
  for (size_t p = 0; p < probe_count; ++p) {
    const size_t i = rng.UniformInt(analytic.size());
    double& theta = probe.mutable_params()[i];
    const double saved = theta;
    theta = saved + kFiniteDifferenceStep;
    const double up = BatchLossOf(probe, batch, tau);
    theta = saved - kFiniteDifferenceStep;
    const double down = BatchLossOf(probe, batch, tau);
    theta = saved;
    const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
    const double err =
        std::fabs(analytic[i] - numeric) / std::max(std::fabs(numeric), 1e-6);
    worst = std::max(worst, err);
  }
  return worst;
}

TrainResult TrainEncoder(std::span<const AudioBuffer> songs,
                         const AugmentPools& pools, const AugmentConfig& aug,
                         AugmentKind kind, const EncoderConfig& encoder_config,
                         const TrainConfig& config, const TrainHooks& hooks) {
  config.Validate();
  aug.Validate();
  BatchSampler sampler(songs, config.batch_pairs);
  const size_t n = config.batch_pairs;
  const size_t steps_per_epoch =
      config.steps_per_epoch > 0
          ? config.steps_per_epoch
          : std::max<size_t>(1, sampler.total_segments() / n);
  const size_t total_steps = steps_per_epoch * config.epochs;

  TrainResult result{Encoder(encoder_config, DeriveSeed(config.seed, 0)), {}, {}};
  Encoder& encoder = result.encoder;
  Rng batch_rng(DeriveSeed(config.seed, 1));
  Rng aug_rng(DeriveSeed(config.seed, DeriveSeed(aug.rng_seed, 2)));

  Rng probe_rng(DeriveSeed(config.seed, 3));
  Rng probe_aug_rng(DeriveSeed(config.seed, DeriveSeed(aug.rng_seed, 4)));
  const std::vector<Spectrogram> probe =
      sampler.Build(sampler.Sample(probe_rng), pools, aug, kind, probe_aug_rng);

  std::vector<double> velocity(encoder.params().size(), 0.0);
  size_t step = 0;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    for (size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      const std::vector<Fragment> fragments = sampler.Sample(batch_rng);
      const std::vector<Spectrogram> batch =
          sampler.Build(fragments, pools, aug, kind, aug_rng);
      double loss = 0.0;
      const std::vector<double> grad =
          BatchGradient(encoder, batch, config.temperature, &loss);
      if (!std::isfinite(loss)) {
        throw NumericalError("training diverged at step " + std::to_string(step));
      }
      const double lr = config.LearningRateAt(step, total_steps);
      std::vector<double>& theta = encoder.mutable_params();
      for (size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] + grad[i];
        theta[i] -= lr * velocity[i];
      }
      sum += loss;
      if (hooks.on_batch) {
        BatchRecord record;
        record.epoch = epoch;
        record.step = step;
        record.loss = loss;
        for (size_t r = 0; r < 2 * n; ++r) {
          record.rows.push_back({fragments[r % n].song, fragments[r % n].segment});
          record.augmented.push_back(r >= n);
        }
        hooks.on_batch(record);
      }
    }
    result.epoch_loss.push_back(sum / static_cast<double>(steps_per_epoch));
    result.probe_loss.push_back(BatchLossOf(encoder, probe, config.temperature));
    if (hooks.on_epoch) {
      hooks.on_epoch(epoch, result.epoch_loss.back(), result.probe_loss.back());
    }
  }
  return result;
}

double PositiveMarginRate(const Encoder& encoder,
                          std::span<const AudioBuffer> songs,
                          const AugmentPools& pools, const AugmentConfig& aug,
                          AugmentKind kind, size_t pairs, uint64_t seed) {
  Require(pairs >= 2, "need at least two validation pairs");
  const auto gated = GatedSegments(songs);
  Rng rng(DeriveSeed(seed, 0));
  Rng aug_rng(DeriveSeed(seed, 1));
  const size_t len = static_cast<size_t>(kSegmentSeconds * kSampleRateHz);
  EmbeddingMatrix clean, distorted;
  for (size_t p = 0; p < pairs; ++p) {
    const size_t s = p % songs.size();
    if (gated[s].empty()) continue;
    const size_t start =
        SegmentStart(gated[s][rng.UniformInt(gated[s].size())], kSampleRateHz);
    clean.push_back(encoder.Forward(MelSpectrogram(songs[s].Slice(start, len))));
    const AudioBuffer d =
        kind == AugmentKind::kProposed
            ? ProposedPipeline(songs[s], start, len, pools, aug, aug_rng)
            : BaselinePipeline(songs[s], start, len, pools, aug, aug_rng);
    distorted.push_back(encoder.Forward(MelSpectrogram(d)));
  }
  Require(clean.size() >= 2, "not enough audible validation fragments");
  size_t wins = 0;
  for (size_t i = 0; i < clean.size(); ++i) {
    double pos = 0.0, neg = 0.0;
    for (size_t j = 0; j < clean.size(); ++j) {
      double dot = 0.0;
      for (size_t d = 0; d < clean[j].size(); ++d) dot += distorted[i][d] * clean[j][d];
      if (j == i) {
        pos = dot;
      } else {
        neg += dot;
      }
    }
    if (pos > neg / static_cast<double>(clean.size() - 1)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(clean.size());
}

}  // namespace afp
