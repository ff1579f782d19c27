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

#include "config.h"

#include <fstream>
#include <sstream>

#include "afp/common/error.h"

namespace afp::tool {
namespace {

// Every key of `overlay` must exist in `base` with a compatible type.
void Merge(json& base, const json& overlay, const std::string& where) {
  if (!overlay.is_object()) throw FormatError("config " + where + " must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw FormatError("unknown config field " + path);
    json& slot = base[key];
    if (slot.is_object()) {
      Merge(slot, value, path);
    } else if (slot.is_number() ? !value.is_number() : slot.type() != value.type()) {
      throw FormatError("config field " + path + " has the wrong type");
    } else {
      slot = value;
    }
  }
}

}  // namespace

json DefaultConfig() {
  return {
      {"seed", 0},
      {"corpus",
       {{"seed", 2026},
        {"songs", 100},
        {"song_duration_s", 30.0},
        {"noise_files_per_kind", 10},
        {"noise_duration_s", 30.0},
        {"irs", 5}}},
      {"encoder",
       {{"channels", {16, 32, 64, 128}},
        {"pool_bins", 4},
        {"pool_frames", 1},
        {"embedding_dim", 64},
        {"hidden_dim", 32}}},
      {"augment",
       {{"kind", "proposed"},
        {"snr_min_db", 0.0},
        {"snr_max_db", 10.0},
        {"ir_probability", 0.5},
        {"filter_probability", 0.4},
        {"time_offset_max_s", 0.2},
        {"rng_seed", 0}}},
      {"train",
       {{"epochs", 120},
        {"batch_pairs", 32},
        {"temperature", 0.05},
        {"steps_per_epoch", 0},
        {"learning_rate", 3e-3},
        {"learning_rate_floor", 1e-7},
        {"momentum", 0.9}}},
      {"index",
       {{"subquantizers", 32},
        {"code_bits", 8},
        {"coarse_cells", 64},
        {"nprobe", 4},
        {"kmeans_iterations", 25},
        {"max_training_sample", 200000}}},
      {"peak",
       {{"fft_size", 1024},
        {"hop", 256},
        {"neighborhood_bins", 15},
        {"neighborhood_frames", 15},
        {"min_db_above_median", 10.0},
        {"fan_out", 5},
        {"min_dt", 1},
        {"max_dt", 200},
        {"max_dk", 128}}},
      {"eval",
       {{"model_tag", ""},
        {"top_k", 4},
        {"query_lens_s", {1, 2, 3, 4, 5, 10, 15}},
        {"queries_per_len", 200},
        {"levels", {"low", "mid", "high"}},
        {"snr_db", {0, 5, 10, 15}},
        {"concert_songs", 15},
        {"m_values", {4, 8, 16, 32, 64, 128}},
        {"sweep_level", "high"},
        {"sweep_query_len_s", 5.0}}},
  };
}

json LoadConfig(const std::filesystem::path& path) {
  json config = DefaultConfig();
  if (path.empty()) return config;
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed config " + path.string() + ": " + e.what());
  }
  Merge(config, file, "");
  return config;
}

void SetField(json& config, const std::string& key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json patch = parsed;
  std::string rest = key;
  std::vector<std::string> parts;
  for (size_t dot; (dot = rest.find('.')) != std::string::npos; rest = rest.substr(dot + 1)) {
    parts.push_back(rest.substr(0, dot));
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  try {
    Merge(config, patch, "");
  } catch (const FormatError& e) {
    throw InvalidArgument(std::string("--set ") + key + ": " + e.what());
  }
}

uint64_t SeedOf(const json& config) {
  try {
    return config.at("seed").get<uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config field seed: ") + e.what());
  }
}

corpus::CorpusSpec CorpusSpecOf(const json& config) {
  corpus::CorpusSpec s;
  s.seed = Field<uint64_t>(config, "corpus", "seed");
  s.songs = Field<int>(config, "corpus", "songs");
  s.song_duration_s = Field<double>(config, "corpus", "song_duration_s");
  s.noise_files_per_kind = Field<int>(config, "corpus", "noise_files_per_kind");
  s.noise_duration_s = Field<double>(config, "corpus", "noise_duration_s");
  s.irs = Field<int>(config, "corpus", "irs");
  return s;
}

EncoderConfig EncoderConfigOf(const json& config) {
  EncoderConfig c;
  c.channels = Field<std::vector<size_t>>(config, "encoder", "channels");
  c.pool_bins = Field<size_t>(config, "encoder", "pool_bins");
  c.pool_frames = Field<size_t>(config, "encoder", "pool_frames");
  c.embedding_dim = Field<size_t>(config, "encoder", "embedding_dim");
  c.hidden_dim = Field<size_t>(config, "encoder", "hidden_dim");
  c.Validate();
  return c;
}

AugmentConfig AugmentConfigOf(const json& config) {
  AugmentConfig c;
  c.snr_min_db = Field<double>(config, "augment", "snr_min_db");
  c.snr_max_db = Field<double>(config, "augment", "snr_max_db");
  c.ir_probability = Field<double>(config, "augment", "ir_probability");
  c.filter_probability = Field<double>(config, "augment", "filter_probability");
  c.time_offset_max_s = Field<double>(config, "augment", "time_offset_max_s");
  c.rng_seed = Field<uint64_t>(config, "augment", "rng_seed");
  c.Validate();
  return c;
}

AugmentKind AugmentKindOf(const json& config) {
  const auto kind = Field<std::string>(config, "augment", "kind");
  if (kind == "proposed") return AugmentKind::kProposed;
  if (kind == "baseline") return AugmentKind::kBaseline;
  throw InvalidArgument("augment.kind must be 'proposed' or 'baseline', got '" + kind + "'");
}

TrainConfig TrainConfigOf(const json& config) {
  TrainConfig c;
  c.epochs = Field<size_t>(config, "train", "epochs");
  c.batch_pairs = Field<size_t>(config, "train", "batch_pairs");
  c.temperature = Field<double>(config, "train", "temperature");
  c.steps_per_epoch = Field<size_t>(config, "train", "steps_per_epoch");
  c.learning_rate = Field<double>(config, "train", "learning_rate");
  c.learning_rate_floor = Field<double>(config, "train", "learning_rate_floor");
  c.momentum = Field<double>(config, "train", "momentum");
  c.seed = SeedOf(config);
  c.Validate();
  return c;
}

IndexConfig IndexConfigOf(const json& config, size_t dim) {
  IndexConfig c;
  c.dim = dim;
  c.subquantizers = Field<size_t>(config, "index", "subquantizers");
  c.code_bits = Field<size_t>(config, "index", "code_bits");
  c.coarse_cells = Field<size_t>(config, "index", "coarse_cells");
  c.nprobe = Field<size_t>(config, "index", "nprobe");
  c.kmeans_iterations = Field<size_t>(config, "index", "kmeans_iterations");
  c.max_training_sample = Field<size_t>(config, "index", "max_training_sample");
  c.seed = SeedOf(config);
  return c;
}

PeakConfig PeakConfigOf(const json& config) {
  PeakConfig c;
  c.stft.fft_size = Field<size_t>(config, "peak", "fft_size");
  c.stft.hop = Field<size_t>(config, "peak", "hop");
  c.neighborhood_bins = Field<size_t>(config, "peak", "neighborhood_bins");
  c.neighborhood_frames = Field<size_t>(config, "peak", "neighborhood_frames");
  c.min_db_above_median = Field<double>(config, "peak", "min_db_above_median");
  c.fan_out = Field<size_t>(config, "peak", "fan_out");
  c.min_dt = Field<uint32_t>(config, "peak", "min_dt");
  c.max_dt = Field<uint32_t>(config, "peak", "max_dt");
  c.max_dk = Field<uint32_t>(config, "peak", "max_dk");
  c.Validate();
  return c;
}

}  // namespace afp::tool
