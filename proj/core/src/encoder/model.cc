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

#include "afp/encoder/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "afp/common/binary_io.h"
#include "afp/common/error.h"
#include "afp/common/rng.h"

namespace afp {
namespace {

constexpr uint16_t kModelVersion = 1;

double Elu(double x) { return x > 0.0 ? x : std::expm1(x); }
// ELU derivative expressed through its output.
double EluGrad(double y) { return y > 0.0 ? 1.0 : y + 1.0; }

size_t Halve(size_t n) { return (n + 1) / 2; }

struct LayerShape {
  size_t in_channels, out_channels, multiplier;
  size_t in_h, in_w, out_h, out_w;
  size_t dw_offset, pw_offset, bias_offset;

  size_t mid_channels() const { return in_channels * multiplier; }
  // A single-channel input needs no channel mixing: the depthwise stage
  // already yields out_channels maps.
  bool pointwise() const { return in_channels != 1; }
};

struct Layout {
  std::vector<LayerShape> layers;
  size_t last_h = 0, last_w = 0;
  size_t projection_offset = 0;
  size_t block_size = 0;  // params per projection block
  size_t total = 0;
};

Layout MakeLayout(const EncoderConfig& c) {
  Layout layout;
  size_t offset = 0, h = c.input_bins, w = c.input_frames, in = 1;
  for (size_t out : c.channels) {
    LayerShape s;
    s.in_channels = in;
    s.out_channels = out;
    s.multiplier = in == 1 ? out : 1;
    s.in_h = h;
    s.in_w = w;
    s.out_h = Halve(h);
    s.out_w = Halve(w);
    s.dw_offset = offset;
    offset += s.mid_channels() * 9;
    s.pw_offset = offset;
    if (s.pointwise()) offset += out * s.mid_channels();
    s.bias_offset = offset;
    offset += out;
    layout.layers.push_back(s);
    h = s.out_h;
    w = s.out_w;
    in = out;
  }
  layout.last_h = h;
  layout.last_w = w;
  layout.projection_offset = offset;
  const size_t sub = c.subvector_dim();
  layout.block_size = c.hidden_dim * sub + c.hidden_dim + c.hidden_dim + 1;
  layout.total = offset + c.embedding_dim * layout.block_size;
  return layout;
}

// Copy of one input plane with a one-sample zero border.
void Pad(const LayerShape& s, const double* plane, std::vector<double>& padded) {
  const size_t pw = s.in_w + 2;
  padded.assign((s.in_h + 2) * pw, 0.0);
  for (size_t y = 0; y < s.in_h; ++y) {
    std::copy(plane + y * s.in_w, plane + (y + 1) * s.in_w,
              padded.data() + (y + 1) * pw + 1);
  }
}

void Depthwise(const LayerShape& s, const double* kernel, const double* in,
               double* out) {
  const size_t plane_in = s.in_h * s.in_w;
  const size_t plane_out = s.out_h * s.out_w;
  const size_t pw = s.in_w + 2;
  std::vector<double> padded;
  for (size_t c = 0; c < s.in_channels; ++c) {
    Pad(s, in + c * plane_in, padded);
    for (size_t m = 0; m < s.multiplier; ++m) {
      const size_t q = c * s.multiplier + m;
      const double* k = kernel + q * 9;
      double* dst = out + q * plane_out;
      for (size_t oy = 0; oy < s.out_h; ++oy) {
        const double* r0 = padded.data() + 2 * oy * pw;
        const double* r1 = r0 + pw;
        const double* r2 = r1 + pw;
        for (size_t ox = 0; ox < s.out_w; ++ox) {
          const size_t x = 2 * ox;
          dst[oy * s.out_w + ox] =
              k[0] * r0[x] + k[1] * r0[x + 1] + k[2] * r0[x + 2] +
              k[3] * r1[x] + k[4] * r1[x + 1] + k[5] * r1[x + 2] +
              k[6] * r2[x] + k[7] * r2[x + 1] + k[8] * r2[x + 2];
        }
      }
    }
  }
}

void DepthwiseBackward(const LayerShape& s, const double* kernel,
                       const double* in, const double* d_out,
                       double* d_kernel, double* d_in) {
  const size_t plane_in = s.in_h * s.in_w;
  const size_t plane_out = s.out_h * s.out_w;
  const size_t pw = s.in_w + 2;
  std::vector<double> padded, d_padded;
  for (size_t c = 0; c < s.in_channels; ++c) {
    Pad(s, in + c * plane_in, padded);
    if (d_in) d_padded.assign(padded.size(), 0.0);
    for (size_t m = 0; m < s.multiplier; ++m) {
      const size_t q = c * s.multiplier + m;
      const double* k = kernel + q * 9;
      const double* g = d_out + q * plane_out;
      double* dk = d_kernel + q * 9;
      for (size_t oy = 0; oy < s.out_h; ++oy) {
        for (int dy = 0; dy < 3; ++dy) {
          const double* row = padded.data() + (2 * oy + dy) * pw;
          for (int dx = 0; dx < 3; ++dx) {
            double acc = 0.0;
            for (size_t ox = 0; ox < s.out_w; ++ox) {
              acc += g[oy * s.out_w + ox] * row[2 * ox + dx];
            }
            dk[dy * 3 + dx] += acc;
          }
        }
      }
      if (!d_in) continue;
      for (size_t oy = 0; oy < s.out_h; ++oy) {
        for (int dy = 0; dy < 3; ++dy) {
          double* row = d_padded.data() + (2 * oy + dy) * pw;
          for (size_t ox = 0; ox < s.out_w; ++ox) {
            const double go = g[oy * s.out_w + ox];
            row[2 * ox] += go * k[dy * 3];
            row[2 * ox + 1] += go * k[dy * 3 + 1];
            row[2 * ox + 2] += go * k[dy * 3 + 2];
          }
        }
      }
    }
    if (!d_in) continue;
    double* dst = d_in + c * plane_in;
    for (size_t y = 0; y < s.in_h; ++y) {
      for (size_t x = 0; x < s.in_w; ++x) dst[y * s.in_w + x] += d_padded[(y + 1) * pw + x + 1];
    }
  }
}

}  // namespace

size_t EncoderConfig::feature_dim() const {
  return channels.empty() ? 0 : channels.back() * pool_bins * pool_frames;
}

size_t EncoderConfig::param_count() const { return MakeLayout(*this).total; }

void EncoderConfig::Validate() const {
  Require(input_bins > 0 && input_frames > 0, "encoder input must be non-empty");
  Require(!channels.empty(), "encoder needs at least one layer");
  for (size_t c : channels) Require(c > 0, "layer width must be positive");
  size_t h = input_bins, w = input_frames;
  for (size_t i = 0; i < channels.size(); ++i) {
    h = Halve(h);
    w = Halve(w);
  }
  Require(pool_bins > 0 && pool_frames > 0 && h % pool_bins == 0 &&
              w % pool_frames == 0,
          "pooling grid must divide the final feature map (" +
              std::to_string(h) + "x" + std::to_string(w) + ")");
  Require(embedding_dim > 0 && feature_dim() % embedding_dim == 0,
          "embedding dimension must divide the feature dimension");
  Require(hidden_dim > 0, "projection hidden width must be positive");
}

Encoder::Encoder(const EncoderConfig& config, uint64_t seed) : config_(config) {
  config_.Validate();
  const Layout layout = MakeLayout(config_);
  params_.assign(layout.total, 0.0);
  Rng rng(seed);
  auto fill = [&](size_t offset, size_t count, size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (size_t i = 0; i < count; ++i) params_[offset + i] = rng.Uniform(-bound, bound);
  };
  for (const LayerShape& s : layout.layers) {
    fill(s.dw_offset, s.mid_channels() * 9, 9);
    if (s.pointwise()) {
      fill(s.pw_offset, s.out_channels * s.mid_channels(), s.mid_channels());
    }
  }
  const size_t sub = config_.subvector_dim(), hid = config_.hidden_dim;
  for (size_t d = 0; d < config_.embedding_dim; ++d) {
    const size_t base = layout.projection_offset + d * layout.block_size;
    fill(base, hid * sub, sub);
    fill(base + hid * sub + hid, hid, hid);
  }
}

Encoder::Encoder(const EncoderConfig& config, std::vector<double> params)
    : config_(config), params_(std::move(params)) {
  config_.Validate();
  Require(params_.size() == config_.param_count(),
          "parameter vector does not match the encoder configuration");
  for (double p : params_) Require(std::isfinite(p), "non-finite encoder parameter");
}

std::vector<double> Encoder::Forward(const Spectrogram& input, Tape* tape) const {
  Require(input.freq_bins == config_.input_bins &&
              input.time_frames == config_.input_frames &&
              input.values.size() == input.freq_bins * input.time_frames,
          "spectrogram shape does not match the encoder input");
  const Layout layout = MakeLayout(config_);
  const double* p = params_.data();

  Tape local;
  Tape& t = tape ? *tape : local;
  t.layer_input.resize(layout.layers.size());
  t.depthwise_out.resize(layout.layers.size());
  t.layer_output.resize(layout.layers.size());

  // Per-patch standardization.
  std::vector<double> x(input.values.begin(), input.values.end());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& v : x) v = (v - mean) * inv_std;

  for (size_t l = 0; l < layout.layers.size(); ++l) {
    const LayerShape& s = layout.layers[l];
    const size_t plane = s.out_h * s.out_w;
    t.layer_input[l] = std::move(x);
    std::vector<double>& mid = t.depthwise_out[l];
    mid.assign(s.mid_channels() * plane, 0.0);
    Depthwise(s, p + s.dw_offset, t.layer_input[l].data(), mid.data());
    std::vector<double>& out = t.layer_output[l];
    if (s.pointwise()) {
      out.assign(s.out_channels * plane, 0.0);
    } else {
      out = mid;
    }
    for (size_t o = 0; o < s.out_channels; ++o) {
      double* dst = out.data() + o * plane;
      const double* w = p + s.pw_offset + o * s.mid_channels();
      for (size_t q = 0; s.pointwise() && q < s.mid_channels(); ++q) {
        const double wq = w[q];
        const double* src = mid.data() + q * plane;
        for (size_t i = 0; i < plane; ++i) dst[i] += wq * src[i];
      }
      const double b = p[s.bias_offset + o];
      for (size_t i = 0; i < plane; ++i) dst[i] = Elu(dst[i] + b);
    }
    x = out;
  }

  // Average pooling onto the pool grid; features are channel-major.
  const size_t ch = config_.channels.back();
  const size_t bh = layout.last_h / config_.pool_bins;
  const size_t bw = layout.last_w / config_.pool_frames;
  const double inv_block = 1.0 / static_cast<double>(bh * bw);
  t.features.assign(config_.feature_dim(), 0.0);
  for (size_t c = 0; c < ch; ++c) {
    for (size_t y = 0; y < layout.last_h; ++y) {
      for (size_t xx = 0; xx < layout.last_w; ++xx) {
        const size_t cell = (y / bh) * config_.pool_frames + xx / bw;
        t.features[c * config_.pool_bins * config_.pool_frames + cell] +=
            x[(c * layout.last_h + y) * layout.last_w + xx] * inv_block;
      }
    }
  }

  const size_t D = config_.embedding_dim, sub = config_.subvector_dim();
  const size_t hid = config_.hidden_dim;
  t.hidden.assign(D * hid, 0.0);
  t.raw.assign(D, 0.0);
  for (size_t d = 0; d < D; ++d) {
    const double* blk = p + layout.projection_offset + d * layout.block_size;
    const double* w1 = blk;
    const double* b1 = blk + hid * sub;
    const double* w2 = b1 + hid;
    const double b2 = w2[hid];
    const double* in = t.features.data() + d * sub;
    double acc = b2;
    for (size_t j = 0; j < hid; ++j) {
      double a = b1[j];
      for (size_t i = 0; i < sub; ++i) a += w1[j * sub + i] * in[i];
      const double e = Elu(a);
      t.hidden[d * hid + j] = e;
      acc += w2[j] * e;
    }
    t.raw[d] = acc;
  }
  double norm = 0.0;
  for (double v : t.raw) norm += v * v;
  norm = std::sqrt(norm);
  if (!std::isfinite(norm) || norm == 0.0) {
    throw NumericalError("encoder produced a non-finite or zero output");
  }
  t.output.resize(D);
  for (size_t d = 0; d < D; ++d) t.output[d] = t.raw[d] / norm;
  return t.output;
}

void Encoder::Backward(const Tape& t, std::span<const double> d_output,
                       std::span<double> grad) const {
  const Layout layout = MakeLayout(config_);
  Require(d_output.size() == config_.embedding_dim, "output gradient size mismatch");
  Require(grad.size() == layout.total, "parameter gradient size mismatch");
  const double* p = params_.data();
  const size_t D = config_.embedding_dim, sub = config_.subvector_dim();
  const size_t hid = config_.hidden_dim;

  double norm = 0.0;
  for (double v : t.raw) norm += v * v;
  norm = std::sqrt(norm);
  double dot = 0.0;
  for (size_t d = 0; d < D; ++d) dot += t.output[d] * d_output[d];

  std::vector<double> d_features(config_.feature_dim(), 0.0);
  for (size_t d = 0; d < D; ++d) {
    const double d_raw = (d_output[d] - t.output[d] * dot) / norm;
    const size_t base = layout.projection_offset + d * layout.block_size;
    const double* w1 = p + base;
    const double* w2 = p + base + hid * sub + hid;
    double* g_w1 = grad.data() + base;
    double* g_b1 = g_w1 + hid * sub;
    double* g_w2 = g_b1 + hid;
    g_w2[hid] += d_raw;
    const double* in = t.features.data() + d * sub;
    double* d_in = d_features.data() + d * sub;
    for (size_t j = 0; j < hid; ++j) {
      const double e = t.hidden[d * hid + j];
      g_w2[j] += d_raw * e;
      const double d_pre = d_raw * w2[j] * EluGrad(e);
      g_b1[j] += d_pre;
      for (size_t i = 0; i < sub; ++i) {
        g_w1[j * sub + i] += d_pre * in[i];
        d_in[i] += d_pre * w1[j * sub + i];
      }
    }
  }

  const size_t bh = layout.last_h / config_.pool_bins;
  const size_t bw = layout.last_w / config_.pool_frames;
  const double inv_block = 1.0 / static_cast<double>(bh * bw);
  std::vector<double> d_x(config_.channels.back() * layout.last_h * layout.last_w);
  for (size_t c = 0; c < config_.channels.back(); ++c) {
    for (size_t y = 0; y < layout.last_h; ++y) {
      for (size_t xx = 0; xx < layout.last_w; ++xx) {
        const size_t cell = (y / bh) * config_.pool_frames + xx / bw;
        d_x[(c * layout.last_h + y) * layout.last_w + xx] =
            d_features[c * config_.pool_bins * config_.pool_frames + cell] * inv_block;
      }
    }
  }

  for (size_t l = layout.layers.size(); l-- > 0;) {
    const LayerShape& s = layout.layers[l];
    const size_t plane = s.out_h * s.out_w;
    const std::vector<double>& out = t.layer_output[l];
    const std::vector<double>& mid = t.depthwise_out[l];
    for (size_t i = 0; i < d_x.size(); ++i) d_x[i] *= EluGrad(out[i]);
    std::vector<double> d_mid(mid.size(), 0.0);
    for (size_t o = 0; o < s.out_channels; ++o) {
      const double* g = d_x.data() + o * plane;
      double bias = 0.0;
      for (size_t i = 0; i < plane; ++i) bias += g[i];
      grad[s.bias_offset + o] += bias;
      if (!s.pointwise()) {
        std::copy(g, g + plane, d_mid.data() + o * plane);
        continue;
      }
      const double* w = p + s.pw_offset + o * s.mid_channels();
      double* gw = grad.data() + s.pw_offset + o * s.mid_channels();
      for (size_t q = 0; q < s.mid_channels(); ++q) {
        const double* src = mid.data() + q * plane;
        double* dm = d_mid.data() + q * plane;
        double acc = 0.0;
        const double wq = w[q];
        for (size_t i = 0; i < plane; ++i) {
          acc += g[i] * src[i];
          dm[i] += wq * g[i];
        }
        gw[q] += acc;
      }
    }
    std::vector<double> d_in;
    if (l > 0) d_in.assign(t.layer_input[l].size(), 0.0);
    DepthwiseBackward(s, p + s.dw_offset, t.layer_input[l].data(), d_mid.data(),
                      grad.data() + s.dw_offset, l > 0 ? d_in.data() : nullptr);
    d_x = std::move(d_in);
  }
}

Embedding Encoder::Embed(const Spectrogram& input) const {
  const std::vector<double> z = Forward(input);
  return Embedding(z.begin(), z.end());
}

Embedding Encoder::EmbedAudio(const AudioBuffer& segment) const {
  return Embed(MelSpectrogram(segment));
}

void Encoder::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  io::WriteMagic(out, "AFPM");
  io::WriteLE<uint16_t>(out, kModelVersion);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.input_bins));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.input_frames));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.channels.size()));
  for (size_t c : config_.channels) io::WriteLE<uint32_t>(out, static_cast<uint32_t>(c));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.pool_bins));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.pool_frames));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.embedding_dim));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.hidden_dim));
  io::WriteLE<uint64_t>(out, params_.size());
  for (double v : params_) io::WriteLE(out, v);
  if (!out) throw FormatError("write failed: " + path.string());
}

Encoder Encoder::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  io::ExpectMagic(in, "AFPM");
  const uint16_t version = io::ReadLE<uint16_t>(in);
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  EncoderConfig c;
  c.input_bins = io::ReadLE<uint32_t>(in);
  c.input_frames = io::ReadLE<uint32_t>(in);
  const uint32_t layers = io::ReadLE<uint32_t>(in);
  if (layers == 0 || layers > 64) throw FormatError("implausible layer count");
  c.channels.resize(layers);
  for (size_t& ch : c.channels) ch = io::ReadLE<uint32_t>(in);
  c.pool_bins = io::ReadLE<uint32_t>(in);
  c.pool_frames = io::ReadLE<uint32_t>(in);
  c.embedding_dim = io::ReadLE<uint32_t>(in);
  c.hidden_dim = io::ReadLE<uint32_t>(in);
  try {
    c.Validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
  const uint64_t count = io::ReadLE<uint64_t>(in);
  if (count != c.param_count()) throw FormatError("parameter count mismatch");
  std::vector<double> params(count);
  for (double& v : params) v = io::ReadLE<double>(in);
  return Encoder(c, std::move(params));
}

}  // namespace afp
