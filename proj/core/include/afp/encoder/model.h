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

// Desk-scale fingerprint encoder: a stack of depthwise-separable stride-2
// convolutions over a standardized log-mel patch, average pooled to an
// h-vector, followed by the split-subvector projection (D independent
// Linear-ELU-Linear blocks, each mapping h/D inputs to one scalar) and L2
// normalization.

#ifndef AFP_ENCODER_MODEL_H_
#define AFP_ENCODER_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "afp/dsp/features.h"

namespace afp {

using Embedding = std::vector<float>;

struct EncoderConfig {
  size_t input_bins = kMelBins;
  size_t input_frames = kMelFrames;
  // Output channels of each separable layer. Every layer halves both
  // spatial axes (3x3 depthwise kernel, stride 2, zero padding 1). A layer
  // with a single input channel uses a depth multiplier equal to its output
  // width and no pointwise stage.
  std::vector<size_t> channels = {16, 32, 64, 128};
  // Average-pooling grid over the last feature map (bins x frames).
  size_t pool_bins = 4;
  size_t pool_frames = 1;
  size_t embedding_dim = 64;
  size_t hidden_dim = 32;

  // channels.back() * pool_bins * pool_frames.
  size_t feature_dim() const;
  size_t subvector_dim() const { return feature_dim() / embedding_dim; }
  size_t param_count() const;
  // Throws InvalidArgument unless the shapes chain and D divides h.
  void Validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

class Encoder {
 public:
  // Fan-in scaled uniform initialization from `seed`.
  Encoder(const EncoderConfig& config, uint64_t seed);
  Encoder(const EncoderConfig& config, std::vector<double> params);

  const EncoderConfig& config() const { return config_; }
  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  // Activations kept by Forward for Backward.
  struct Tape {
    std::vector<std::vector<double>> layer_input;
    std::vector<std::vector<double>> depthwise_out;
    std::vector<std::vector<double>> layer_output;
    std::vector<double> features;
    std::vector<double> hidden;  // D x hidden_dim, post-ELU
    std::vector<double> raw;     // D, before normalization
    std::vector<double> output;  // D, unit norm
  };

  // Unit-norm embedding in double precision. Throws InvalidArgument on a
  // shape mismatch and NumericalError on a non-finite activation.
  std::vector<double> Forward(const Spectrogram& input, Tape* tape = nullptr) const;

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void Backward(const Tape& tape, std::span<const double> d_output,
                std::span<double> grad) const;

  Embedding Embed(const Spectrogram& input) const;
  Embedding EmbedAudio(const AudioBuffer& segment) const;

  // Binary model file: magic "AFPM", version, config, float64 params.
  void Save(const std::filesystem::path& path) const;
  static Encoder Load(const std::filesystem::path& path);

 private:
  EncoderConfig config_;
  std::vector<double> params_;
};

}  // namespace afp

#endif  // AFP_ENCODER_MODEL_H_
